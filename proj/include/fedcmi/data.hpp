#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "fedcmi/io.hpp"
#include "fedcmi/model.hpp"
#include "fedcmi/rng.hpp"
#include "fedcmi/tensor.hpp"

namespace fedcmi {

// Synthetic two-modality data: class-conditional Gaussians around unit-norm
// class means, x = s_m * mu_{c,m} + sigma_m * N(0, I). The first half of each
// mean is drawn from a stream shared by both modalities, the second half from
// a modality-specific stream, so the modalities carry overlapping plus
// complementary class information and fusion can beat either one alone.

struct DataSpec {
  std::size_t num_classes = 4;
  std::size_t dim_m0 = 16;
  std::size_t dim_m1 = 16;
  double scale_m0 = 1.0;
  double scale_m1 = 1.0;
  double sigma_m0 = 1.0;
  double sigma_m1 = 1.0;
  std::size_t n_train = 2000;
  std::size_t n_test = 500;
  uint64_t seed = 0;

  double scale(Modality m) const { return m == Modality::m0 ? scale_m0 : scale_m1; }
  double sigma(Modality m) const { return m == Modality::m0 ? sigma_m0 : sigma_m1; }
  std::size_t dim(Modality m) const { return m == Modality::m0 ? dim_m0 : dim_m1; }

  void validate() const {
    if (num_classes < 2) throw ParamError("DataSpec: need at least two classes");
    if (dim_m0 == 0 || dim_m1 == 0) throw ParamError("DataSpec: dims must be positive");
    if (!(sigma_m0 > 0.0) || !(sigma_m1 > 0.0))
      throw ParamError("DataSpec: noise std must be positive");
    if (scale_m0 < 0.0 || scale_m1 < 0.0) throw ParamError("DataSpec: scales must be >= 0");
    if (n_train == 0 || n_test == 0) throw ParamError("DataSpec: split sizes must be positive");
  }
};

// Sample-presence mask bits.
inline constexpr uint8_t kMaskM0 = 1;
inline constexpr uint8_t kMaskM1 = 2;
inline constexpr uint8_t kMaskBoth = kMaskM0 | kMaskM1;

struct MultimodalDataset {
  Tensor2 x_m0;                // n x dim_m0
  Tensor2 x_m1;                // n x dim_m1
  std::vector<int> y;          // labels in [0, num_classes)
  std::vector<uint8_t> mask;   // per-sample presence bits
  std::size_t num_classes = 0;

  std::size_t size() const { return y.size(); }
};

// Unit-norm class mean for (seed, class, modality).
inline std::vector<double> class_mean(uint64_t seed, std::size_t c, Modality m, std::size_t dim) {
  std::size_t specific_block = dim / 2;
  std::size_t shared_block = dim - specific_block;
  Rng shared = stream(seed, "mean-shared", c);
  Rng specific = stream(seed, "mean-specific", c, idx(m));
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < shared_block; ++i) v[i] = shared.next_gauss();
  for (std::size_t i = 0; i < specific_block; ++i) v[shared_block + i] = specific.next_gauss();
  double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  if (norm < 1e-12) {
    v.assign(dim, 0.0);
    v[0] = 1.0;
    return v;
  }
  for (auto& x : v) x /= norm;
  return v;
}

inline MultimodalDataset generate_split(const DataSpec& spec, std::string_view split_tag,
                                        std::size_t n) {
  spec.validate();
  MultimodalDataset ds;
  ds.num_classes = spec.num_classes;
  ds.x_m0 = Tensor2(n, spec.dim_m0);
  ds.x_m1 = Tensor2(n, spec.dim_m1);
  ds.y.resize(n);
  ds.mask.assign(n, kMaskBoth);

  Rng labels = stream(spec.seed, "labels", hash_tag(split_tag));
  for (std::size_t i = 0; i < n; ++i)
    ds.y[i] = static_cast<int>(labels.next_below(spec.num_classes));

  for (Modality m : {Modality::m0, Modality::m1}) {
    std::vector<std::vector<double>> means;
    for (std::size_t c = 0; c < spec.num_classes; ++c)
      means.push_back(class_mean(spec.seed, c, m, spec.dim(m)));
    Rng noise = stream(spec.seed, "features", hash_tag(split_tag), idx(m));
    Tensor2& x = m == Modality::m0 ? ds.x_m0 : ds.x_m1;
    double s = spec.scale(m), sigma = spec.sigma(m);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& mu = means[static_cast<std::size_t>(ds.y[i])];
      for (std::size_t d = 0; d < spec.dim(m); ++d)
        x(i, d) = s * mu[d] + sigma * noise.next_gauss();
    }
  }
  return ds;
}

struct GeneratedData {
  MultimodalDataset train;
  MultimodalDataset test;
};

inline GeneratedData generate_dataset(const DataSpec& spec) {
  return {generate_split(spec, "train", spec.n_train),
          generate_split(spec, "test", spec.n_test)};
}

// ---------------------------------------------------------------------------
// Partitioning and modality availability

enum class Availability : uint8_t {
  both = kMaskBoth,
  m0_only = kMaskM0,
  m1_only = kMaskM1,
};

inline bool has_modality(Availability a, Modality m) {
  return static_cast<uint8_t>(a) & (m == Modality::m0 ? kMaskM0 : kMaskM1);
}

using PartitionIndices = std::vector<std::vector<std::size_t>>;

struct ClientAssignment {
  PartitionIndices indices;               // per client, disjoint, exhaustive
  std::vector<Availability> availability;  // per client

  std::size_t num_clients() const { return indices.size(); }
};

inline PartitionIndices iid_partition(std::size_t n, std::size_t n_clients, uint64_t seed) {
  if (n_clients == 0) throw ParamError("iid_partition: need at least one client");
  if (n_clients > n) throw ParamError("iid_partition: more clients than samples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = stream(seed, "iid-partition");
  rng.shuffle(order);
  PartitionIndices out(n_clients);
  std::size_t at = 0;
  for (std::size_t i = 0; i < n_clients; ++i) {
    std::size_t take = n / n_clients + (i < n % n_clients ? 1 : 0);
    out[i].assign(order.begin() + at, order.begin() + at + take);
    at += take;
  }
  return out;
}

// Per class, deal samples to clients with proportions ~ Dirichlet(alpha*1_N).
// Quotas use largest-remainder rounding; empty clients are repaired by
// re-dealing one sample at a time from the currently largest client so every
// |D_i| stays positive.
inline PartitionIndices dirichlet_partition(std::size_t n, const std::vector<int>& labels,
                                            std::size_t n_clients, double alpha, uint64_t seed) {
  if (labels.size() != n) throw ParamError("dirichlet_partition: labels length != n");
  if (n_clients == 0) throw ParamError("dirichlet_partition: need at least one client");
  if (n_clients > n) throw ParamError("dirichlet_partition: more clients than samples");
  if (!(alpha > 0.0)) throw ParamError("dirichlet_partition: alpha must be positive");

  int max_label = *std::max_element(labels.begin(), labels.end());
  std::size_t num_classes = static_cast<std::size_t>(max_label) + 1;
  PartitionIndices out(n_clients);
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (static_cast<std::size_t>(labels[i]) == c) members.push_back(i);
    if (members.empty()) continue;
    Rng rng = stream(seed, "dirichlet", c);
    rng.shuffle(members);
    std::vector<double> props = rng.next_dirichlet(alpha, n_clients);

    std::vector<std::size_t> quota(n_clients);
    std::vector<std::pair<double, std::size_t>> rema(n_clients);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < n_clients; ++i) {
      double exact = props[i] * static_cast<double>(members.size());
      quota[i] = static_cast<std::size_t>(exact);
      rema[i] = {exact - static_cast<double>(quota[i]), i};
      assigned += quota[i];
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t r = 0; assigned < members.size(); ++r, ++assigned)
      ++quota[rema[r % n_clients].second];

    std::size_t at = 0;
    for (std::size_t i = 0; i < n_clients; ++i) {
      out[i].insert(out[i].end(), members.begin() + at, members.begin() + at + quota[i]);
      at += quota[i];
    }
  }

  for (;;) {
    auto empty_it = std::find_if(out.begin(), out.end(),
                                 [](const auto& v) { return v.empty(); });
    if (empty_it == out.end()) break;
    auto largest = std::max_element(out.begin(), out.end(),
                                    [](const auto& a, const auto& b) { return a.size() < b.size(); });
    empty_it->push_back(largest->back());
    largest->pop_back();
  }
  return out;
}

inline std::vector<Availability> assign_modalities(std::size_t n_clients, double both_fraction,
                                                   uint64_t seed) {
  if (both_fraction < 0.0 || both_fraction > 1.0)
    throw ParamError("assign_modalities: both_fraction must be in [0,1]");
  std::vector<std::size_t> order(n_clients);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = stream(seed, "assign-modalities");
  rng.shuffle(order);
  std::size_t n_both = static_cast<std::size_t>(both_fraction * static_cast<double>(n_clients));
  std::vector<Availability> out(n_clients, Availability::both);
  for (std::size_t r = n_both; r < n_clients; ++r)
    out[order[r]] = rng.next_unit() < 0.5 ? Availability::m0_only : Availability::m1_only;
  return out;
}

inline std::vector<Availability> modality_dropout(std::vector<Availability> avail,
                                                  double drop_prob, uint64_t seed) {
  if (drop_prob < 0.0 || drop_prob > 1.0)
    throw ParamError("modality_dropout: drop_prob must be in [0,1]");
  Rng rng = stream(seed, "modality-dropout");
  for (auto& a : avail) {
    if (a != Availability::both) continue;
    if (rng.next_unit() < drop_prob)
      a = rng.next_unit() < 0.5 ? Availability::m0_only : Availability::m1_only;
  }
  return avail;
}

// ---------------------------------------------------------------------------
// Oracles

struct OracleEstimate {
  double accuracy = 0.0;
  double std_error = 0.0;
  std::size_t n_draws = 0;
};

// Monte-Carlo estimate of the Bayes-optimal (nearest class mean) accuracy for
// one modality, on fresh draws from its own stream.
inline OracleEstimate bayes_oracle_accuracy(const DataSpec& spec, Modality m,
                                            std::size_t n_draws = 200000) {
  spec.validate();
  std::size_t dim = spec.dim(m);
  double s = spec.scale(m), sigma = spec.sigma(m);
  std::vector<std::vector<double>> means;
  for (std::size_t c = 0; c < spec.num_classes; ++c)
    means.push_back(class_mean(spec.seed, c, m, dim));

  Rng rng = stream(spec.seed, "bayes-oracle", idx(m));
  std::vector<double> x(dim);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_draws; ++i) {
    auto c = static_cast<std::size_t>(rng.next_below(spec.num_classes));
    for (std::size_t d = 0; d < dim; ++d) x[d] = s * means[c][d] + sigma * rng.next_gauss();
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
      double dist = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        double diff = x[d] - s * means[k][d];
        dist += diff * diff;
      }
      if (dist < best_d) {
        best_d = dist;
        best = k;
      }
    }
    if (best == c) ++hits;
  }
  double acc = static_cast<double>(hits) / static_cast<double>(n_draws);
  double se = std::sqrt(acc * (1.0 - acc) / static_cast<double>(n_draws));
  return {acc, se, n_draws};
}

// Nearest-class-mean accuracy of one modality on already generated data.
inline double nearest_mean_accuracy(const MultimodalDataset& ds, const DataSpec& spec,
                                    Modality m) {
  std::size_t dim = spec.dim(m);
  double s = spec.scale(m);
  std::vector<std::vector<double>> means;
  for (std::size_t c = 0; c < spec.num_classes; ++c)
    means.push_back(class_mean(spec.seed, c, m, dim));
  const Tensor2& x = m == Modality::m0 ? ds.x_m0 : ds.x_m1;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
      double dist = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        double diff = x(i, d) - s * means[k][d];
        dist += diff * diff;
      }
      if (dist < best_d) {
        best_d = dist;
        best = k;
      }
    }
    if (best == static_cast<std::size_t>(ds.y[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

// ---------------------------------------------------------------------------
// Flat binary dataset format: "FCMI" magic, version, n, C, d_m0, d_m1 header,
// then the two little-endian f64 feature blocks, u32 labels, u8 masks.

inline constexpr uint32_t kDatasetVersion = 1;

inline std::vector<uint8_t> serialize_dataset(const MultimodalDataset& ds) {
  require_little_endian();
  ByteWriter w;
  w.magic("FCMI");
  w.u32(kDatasetVersion);
  w.u32(static_cast<uint32_t>(ds.size()));
  w.u32(static_cast<uint32_t>(ds.num_classes));
  w.u32(static_cast<uint32_t>(ds.x_m0.cols()));
  w.u32(static_cast<uint32_t>(ds.x_m1.cols()));
  w.f64_block(ds.x_m0.data(), ds.x_m0.size());
  w.f64_block(ds.x_m1.data(), ds.x_m1.size());
  for (int label : ds.y) w.u32(static_cast<uint32_t>(label));
  for (uint8_t m : ds.mask) w.u8(m);
  return w.take();
}

inline MultimodalDataset parse_dataset(const std::vector<uint8_t>& bytes) {
  require_little_endian();
  ByteReader r(bytes);
  r.magic("FCMI");
  uint32_t version = r.u32();
  if (version != kDatasetVersion)
    throw IoError("unsupported dataset version " + std::to_string(version));
  uint32_t n = r.u32(), num_classes = r.u32(), d0 = r.u32(), d1 = r.u32();
  MultimodalDataset ds;
  ds.num_classes = num_classes;
  ds.x_m0 = Tensor2(n, d0);
  ds.x_m1 = Tensor2(n, d1);
  r.f64_block(ds.x_m0.data(), ds.x_m0.size());
  r.f64_block(ds.x_m1.data(), ds.x_m1.size());
  ds.y.resize(n);
  for (auto& label : ds.y) {
    uint32_t v = r.u32();
    if (v >= num_classes) throw IoError("label out of range in dataset file");
    label = static_cast<int>(v);
  }
  ds.mask.resize(n);
  for (auto& m : ds.mask) m = r.u8();
  if (!r.at_end()) throw IoError("trailing bytes in dataset file");
  return ds;
}

// Gather rows of a shard into dense batch tensors. Absent modalities are
// never materialized, so masked features cannot be read downstream.
struct Batch {
  Tensor2 x_m0;
  Tensor2 x_m1;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
};

inline Batch gather(const MultimodalDataset& ds, const std::vector<std::size_t>& rows,
                    Availability avail) {
  Batch b;
  b.y.reserve(rows.size());
  for (std::size_t r : rows) b.y.push_back(ds.y[r]);
  for (Modality m : {Modality::m0, Modality::m1}) {
    if (!has_modality(avail, m)) continue;
    const Tensor2& src = m == Modality::m0 ? ds.x_m0 : ds.x_m1;
    Tensor2 dst(rows.size(), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      uint8_t bit = m == Modality::m0 ? kMaskM0 : kMaskM1;
      if (!(ds.mask[rows[i]] & bit))
        throw UsageError("gather: sample lacks a modality its client claims");
      for (std::size_t c = 0; c < src.cols(); ++c) dst(i, c) = src(rows[i], c);
    }
    (m == Modality::m0 ? b.x_m0 : b.x_m1) = std::move(dst);
  }
  return b;
}

}  // namespace fedcmi
