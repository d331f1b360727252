#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <string>
#include <vector>

#include "fedcmi/data.hpp"
#include "fedcmi/imbalance.hpp"
#include "fedcmi/metrics.hpp"
#include "fedcmi/model.hpp"
#include "fedcmi/rng.hpp"

namespace fedcmi {

enum class Strategy : uint8_t { fedcmi = 0, mfedavg = 1, mfedprox = 2 };

inline const char* name(Strategy s) {
  switch (s) {
    case Strategy::fedcmi: return "fedcmi";
    case Strategy::mfedavg: return "mfedavg";
    case Strategy::mfedprox: return "mfedprox";
  }
  return "?";
}

struct FedConfig {
  std::size_t n_clients = 20;
  std::size_t clients_per_round = 5;
  std::size_t rounds = 60;
  std::size_t local_epochs = 5;
  std::size_t batch_size = 16;
  double lr = 1e-3;
  double kappa = 2.0;
  double mu = 1.0;
  double temp = 3.0;
  double beta = 1.0;
  double t_min = kDefaultTempFloor;
  bool t2_scale = false;
  Strategy strategy = Strategy::fedcmi;
  uint64_t selection_seed = 0;
  uint64_t init_seed = 0;
  uint64_t data_seed = 0;  // drives mini-batch order
  std::size_t workers = 1;

  // mfedavg forces kappa=0, mu=0 on a plain arch; mfedprox forces kappa=0.
  ArchKind arch_kind() const {
    return strategy == Strategy::fedcmi ? ArchKind::fedcmi : ArchKind::plain;
  }
  double effective_kappa() const { return strategy == Strategy::fedcmi ? kappa : 0.0; }
  double effective_mu() const { return strategy == Strategy::mfedavg ? 0.0 : mu; }

  void validate() const {
    if (n_clients == 0) throw ParamError("FedConfig: need at least one client");
    if (clients_per_round == 0 || clients_per_round > n_clients)
      throw ParamError("FedConfig: clients_per_round must be in [1, n_clients]");
    if (local_epochs == 0) throw ParamError("FedConfig: local_epochs must be positive");
    if (batch_size == 0) throw ParamError("FedConfig: batch_size must be positive");
    if (!(lr >= 0.0)) throw ParamError("FedConfig: lr must be non-negative");
    if (kappa < 0.0 || mu < 0.0) throw ParamError("FedConfig: kappa and mu must be >= 0");
    if (!(temp > 0.0) || !(beta > 0.0)) throw ParamError("FedConfig: T and beta must be positive");
    if (!(t_min > 0.0) || t_min > temp) throw ParamError("FedConfig: need 0 < t_min <= T");
    if (workers == 0) throw ParamError("FedConfig: workers must be positive");
  }
};

struct ClientState {
  std::size_t id = 0;
  std::vector<std::size_t> shard;  // indices into the training set
  Availability avail = Availability::both;
  std::array<MlpParams, 2> ip;  // persists across rounds, never communicated
};

// Uniform sample of k client ids without replacement, deterministic per
// (seed, round), returned in ascending order.
inline std::vector<std::size_t> select_clients(std::size_t n_clients, std::size_t k,
                                               std::size_t round, uint64_t seed) {
  if (k > n_clients) throw ParamError("select_clients: k exceeds client count");
  std::vector<std::size_t> ids(n_clients);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng = stream(seed, "select", round);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.next_below(n_clients - i));
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Shuffled mini-batch index lists for one local epoch, from a dedicated
// (client, round, epoch) stream so scheduling cannot perturb them.
inline std::vector<std::vector<std::size_t>> epoch_batches(const std::vector<std::size_t>& shard,
                                                           std::size_t batch_size,
                                                           uint64_t data_seed,
                                                           std::size_t client_id,
                                                           std::size_t round, std::size_t epoch) {
  std::vector<std::size_t> order = shard;
  Rng rng = stream(data_seed, "batch-order", client_id, round, epoch);
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t at = 0; at < order.size(); at += batch_size) {
    std::size_t end = std::min(order.size(), at + batch_size);
    batches.emplace_back(order.begin() + at, order.begin() + end);
  }
  return batches;
}

// Modules a client trains locally; IPs are trained but never leave. A
// unimodal fedcmi client trains exactly its modality branch. A unimodal
// plain-arch client has no branch head of its own, so it trains its encoder
// plus the joint head through the zero-filled fusion path, the direct
// multimodal extension of the baselines.
inline std::vector<std::string> trained_modules(ArchKind arch, Availability avail) {
  if (avail == Availability::both) {
    if (arch == ArchKind::fedcmi)
      return {"enc_m0", "enc_m1", "sp_m0", "sp_m1", "ip_m0", "ip_m1", "sc_m0", "sc_m1", "joint"};
    return {"enc_m0", "enc_m1", "joint"};
  }
  const char* suffix = avail == Availability::m0_only ? "m0" : "m1";
  if (arch == ArchKind::fedcmi)
    return {std::string("enc_") + suffix, std::string("sp_") + suffix,
            std::string("sc_") + suffix};
  return {std::string("enc_") + suffix, "joint"};
}

// Modules the client sends back: everything trained except the IPs.
inline std::vector<std::string> contributed_modules(ArchKind arch, Availability avail) {
  std::vector<std::string> mods = trained_modules(arch, avail);
  std::erase_if(mods, [](const std::string& m) { return m.rfind("ip_", 0) == 0; });
  return mods;
}

template <typename V>
std::map<std::string, V> filter_to_modules(const std::map<std::string, V>& in,
                                           const std::vector<std::string>& modules) {
  std::map<std::string, V> out;
  for (const auto& [k, v] : in)
    for (const auto& m : modules)
      if (module_of_key(k) == m) {
        out.emplace(k, v);
        break;
      }
  return out;
}

struct LocalUpdateResult {
  std::vector<uint8_t> payload;  // updated contributed modules, serialized
  std::size_t sample_count = 0;
  Availability avail = Availability::both;
  LossBreakdown mean_loss;
  double rho_overall = 1.0;
  bool rho_valid = false;
  std::array<MlpParams, 2> new_ip;
};

// One client's round: E epochs of mini-batch SGD on the strategy's loss
// against the freshly received base modules. FedCMI multimodal clients
// recompute class-wise stats each epoch and gate the teacher per batch;
// unimodal clients train only their own branch with the reduced loss.
inline LocalUpdateResult local_update(const ClientState& client, const Checkpoint& global_ck,
                                      const MultimodalDataset& train, const ArchConfig& arch,
                                      const FedConfig& cfg, std::size_t round) {
  if (client.shard.empty()) throw UsageError("local_update: empty shard");

  ModelParams model = init_model(arch);
  apply_checkpoint(model, global_ck);
  if (arch.arch == ArchKind::fedcmi) model.ip = client.ip;
  const ModelParams global_model = model;  // frozen round-start copy

  const bool multimodal = client.avail == Availability::both;
  const Modality uni = client.avail == Availability::m0_only ? Modality::m0 : Modality::m1;
  const std::vector<std::string> trained = trained_modules(arch.arch, client.avail);
  const std::vector<std::string> contributed = contributed_modules(arch.arch, client.avail);
  const LossHyper hp{cfg.effective_kappa(), cfg.effective_mu(), cfg.temp, cfg.t2_scale};
  const auto global_prox = filter_to_modules(param_map(global_model, true), contributed);

  LossBreakdown loss_sum;
  std::size_t steps = 0;
  DiscrepancyStats stats;

  for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    if (multimodal && arch.arch == ArchKind::fedcmi) {
      Batch full = gather(train, client.shard, Availability::both);
      Tensor2 sp0 = forward_unimodal(model, Modality::m0, full.x_m0);
      Tensor2 sp1 = forward_unimodal(model, Modality::m1, full.x_m1);
      auto cw = classwise_discrepancy(sp0, sp1, full.y, arch.num_classes);
      stats.rho_class = cw.rho_class;
      stats.rho_overall = cw.rho_overall;
      stats.temps = adapt_temperature(cw.rho_class, cw.rho_overall, cfg.temp, cfg.beta, cfg.t_min);
    }
    for (const auto& rows :
         epoch_batches(client.shard, cfg.batch_size, cfg.data_seed, client.id, round, epoch)) {
      Batch b = gather(train, rows, client.avail);
      GradTape t;
      ModelVars v = trace_params(t, model);
      AssembledLoss loss;
      if (multimodal && arch.arch == ArchKind::fedcmi) {
        Tensor2 bsp0 = forward_unimodal(model, Modality::m0, b.x_m0);
        Tensor2 bsp1 = forward_unimodal(model, Modality::m1, b.x_m1);
        stats.rho_batch = batch_discrepancy_ratio(bsp0, bsp1, b.y);
        Modality teacher = choose_teacher(stats.rho_batch);
        Tensor2 teacher_logits = forward_unimodal(
            global_model, teacher, teacher == Modality::m0 ? b.x_m0 : b.x_m1);
        ForwardVars fwd = forward_full(t, v, arch, b.x_m0, b.x_m1);
        loss = assemble_total_loss(t, fwd, b.y, stats, teacher_logits,
                                   var_map(v, model, true), global_prox, hp);
      } else if (multimodal) {
        ForwardVars fwd = forward_full(t, v, arch, b.x_m0, b.x_m1);
        Var ce = mean_ce_of_logits(t, fwd.joint_logits, b.y);
        Var total = ce;
        loss.breakdown.ce_joint = t.value(ce)(0, 0);
        if (hp.mu != 0.0) {
          Var prox = prox_term(t, var_map(v, model, true), global_prox);
          total = t.add(ce, t.scale(prox, hp.mu));
          loss.breakdown.prox = t.value(prox)(0, 0);
        }
        loss.total = total;
        loss.breakdown.total = t.value(total)(0, 0);
      } else {
        Var logits = forward_unimodal(t, v, arch, uni, uni == Modality::m0 ? b.x_m0 : b.x_m1);
        auto trained_vars = filter_to_modules(var_map(v, model, false), contributed);
        loss = unimodal_total_loss(t, logits, b.y, uni, trained_vars, global_prox, hp.mu);
      }
      t.backward(loss.total);
      GradMap grads = filter_to_modules(collect_grads(t, v, model), trained);
      sgd_step(model, grads, cfg.lr);
      loss_sum += loss.breakdown;
      ++steps;
    }
  }

  LocalUpdateResult res;
  res.payload = serialize_modules(model, contributed);
  res.sample_count = client.shard.size();
  res.avail = client.avail;
  res.mean_loss = loss_sum.scaled(1.0 / static_cast<double>(steps));
  if (arch.arch == ArchKind::fedcmi) res.new_ip = model.ip;
  if (multimodal) {
    Batch full = gather(train, client.shard, Availability::both);
    Tensor2 p0 = forward_unimodal(model, Modality::m0, full.x_m0);
    Tensor2 p1 = forward_unimodal(model, Modality::m1, full.x_m1);
    res.rho_overall = classwise_discrepancy(p0, p1, full.y, arch.num_classes).rho_overall;
    res.rho_valid = true;
  }
  return res;
}

// Sample-weighted average per module over the clients that sent that module;
// weights are renormalized among contributors, so a branch nobody trained
// keeps its previous global value.
inline void aggregate(ModelParams& global, const std::vector<Checkpoint>& updates,
                      const std::vector<std::size_t>& sample_counts) {
  if (updates.empty()) throw UsageError("aggregate: no updates");
  if (updates.size() != sample_counts.size())
    throw UsageError("aggregate: one sample count per update required");
  std::map<std::string, std::vector<std::pair<const Tensor2*, double>>> by_key;
  for (std::size_t i = 0; i < updates.size(); ++i)
    for (const auto& [key, t] : updates[i].entries) {
      if (is_local_only_key(key)) throw UsageError("aggregate: IP key in payload: " + key);
      by_key[key].push_back({&t, static_cast<double>(sample_counts[i])});
    }
  for (auto& [key, contribs] : by_key) {
    Tensor2* dst = find_param(global, key);
    if (dst == nullptr) throw UsageError("aggregate: unknown key " + key);
    double total = 0.0;
    for (const auto& [t, w] : contribs) total += w;
    Tensor2 acc(dst->rows(), dst->cols());
    for (const auto& [t, w] : contribs) {
      check_same_shape(*dst, *t, "aggregate");
      axpy(acc, w / total, *t);
    }
    *dst = std::move(acc);
  }
}

struct RoundRecord {
  std::size_t round = 0;
  std::vector<std::size_t> selected;
  RoundMetrics metrics;
};

struct FedRunResult {
  std::vector<RoundRecord> records;
  ModelParams global;
  std::vector<ClientState> clients;
};

struct FedRunHooks {
  // Observes every serialized payload (server->client and client->server).
  std::function<void(std::size_t round, const std::vector<std::string>& keys)> on_payload;
  // Runs after aggregation and evaluation of each round.
  std::function<void(std::size_t round, const ModelParams& global)> on_round_end;
};

// Algorithm: per round, select clients, distribute the base modules through
// the serialized payload, run local updates (possibly concurrently on
// snapshots), fold the updates back in ascending client-id order and evaluate
// on the held-out test split. Deterministic for fixed seeds at any worker
// count.
inline FedRunResult run_federation(const FedConfig& cfg, const ArchConfig& arch,
                                   const MultimodalDataset& train, const MultimodalDataset& test,
                                   const ClientAssignment& assignment,
                                   const FedRunHooks& hooks = {}) {
  cfg.validate();
  arch.validate();
  if (arch.arch != cfg.arch_kind())
    throw UsageError("run_federation: strategy and architecture kind disagree");
  if (assignment.num_clients() != cfg.n_clients ||
      assignment.availability.size() != cfg.n_clients)
    throw UsageError("run_federation: assignment does not cover n_clients");

  FedRunResult result;
  result.global = init_model(arch);
  for (std::size_t i = 0; i < cfg.n_clients; ++i) {
    if (assignment.indices[i].empty()) throw UsageError("run_federation: empty client shard");
    result.clients.push_back(
        {i, assignment.indices[i], assignment.availability[i], result.global.ip});
  }

  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    auto selected = select_clients(cfg.n_clients, cfg.clients_per_round, round,
                                   cfg.selection_seed);
    std::vector<uint8_t> down = serialize_checkpoint(result.global, /*base_only=*/true);
    Checkpoint global_ck = parse_checkpoint(down);
    if (hooks.on_payload) hooks.on_payload(round, global_ck.keys());

    std::vector<LocalUpdateResult> results(selected.size());
    auto run_one = [&](std::size_t slot) {
      results[slot] = local_update(result.clients[selected[slot]], global_ck, train, arch, cfg,
                                   round);
    };
    if (cfg.workers <= 1) {
      for (std::size_t i = 0; i < selected.size(); ++i) run_one(i);
    } else {
      for (std::size_t at = 0; at < selected.size(); at += cfg.workers) {
        std::vector<std::future<void>> tasks;
        for (std::size_t i = at; i < std::min(selected.size(), at + cfg.workers); ++i)
          tasks.push_back(std::async(std::launch::async, run_one, i));
        for (auto& t : tasks) t.get();
      }
    }

    std::vector<Checkpoint> updates;
    std::vector<std::size_t> counts;
    LossBreakdown loss_sum;
    double rho_sum = 0.0;
    std::size_t rho_n = 0;
    for (std::size_t i = 0; i < selected.size(); ++i) {
      Checkpoint up = parse_checkpoint(results[i].payload);
      if (hooks.on_payload) hooks.on_payload(round, up.keys());
      updates.push_back(std::move(up));
      counts.push_back(results[i].sample_count);
      loss_sum += results[i].mean_loss;
      if (results[i].rho_valid) {
        rho_sum += results[i].rho_overall;
        ++rho_n;
      }
      if (arch.arch == ArchKind::fedcmi)
        result.clients[selected[i]].ip = std::move(results[i].new_ip);
    }
    aggregate(result.global, updates, counts);

    RoundRecord rec;
    rec.round = round;
    rec.selected = selected;
    rec.metrics = evaluate(result.global, test);
    rec.metrics.mean_loss = loss_sum.scaled(1.0 / static_cast<double>(selected.size()));
    rec.metrics.mean_rho = rho_n > 0 ? rho_sum / static_cast<double>(rho_n) : 1.0;
    result.records.push_back(std::move(rec));
    if (hooks.on_round_end) hooks.on_round_end(round, result.global);
  }
  return result;
}

}  // namespace fedcmi
