#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fedcmi/rng.hpp"
#include "fedcmi/tensor.hpp"

namespace fedcmi {

// One MLP: an ordered list of (weight, bias) layers. Weight l is
// (out_dim x in_dim), bias is 1 x out_dim, so adjacent layers chain.
struct MlpLayer {
  Tensor2 w;
  Tensor2 b;
};

struct MlpParams {
  std::vector<MlpLayer> layers;

  bool empty() const { return layers.empty(); }
  std::size_t in_dim() const { return layers.front().w.cols(); }
  std::size_t out_dim() const { return layers.back().w.rows(); }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }
};

// He-scaled gaussian weights, zero biases. Each layer draws from its own
// stream so the result does not depend on construction order.
inline MlpParams init_mlp(const std::vector<std::size_t>& dims, uint64_t seed,
                          std::string_view name) {
  if (dims.size() < 2) throw ParamError("init_mlp: need at least one layer");
  MlpParams mlp;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    std::size_t in = dims[l], out = dims[l + 1];
    if (in == 0 || out == 0) throw ParamError("init_mlp: zero layer dimension");
    Rng rng = stream(seed, name, l);
    double std_dev = std::sqrt(2.0 / static_cast<double>(in));
    Tensor2 w(out, in);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = std_dev * rng.next_gauss();
    mlp.layers.push_back({std::move(w), Tensor2(1, out)});
  }
  return mlp;
}

// Gradients (or any per-parameter tensors) keyed by the stable string keys of
// the model registry, e.g. "enc_m0.l0.W".
using GradMap = std::map<std::string, Tensor2>;

// p <- p - lr * g for every key in grads. Keys that do not exist in the
// target registry are usage errors, as are shape mismatches.
template <typename ParamLookup>
void sgd_step_keys(ParamLookup&& find_param, const GradMap& grads, double lr) {
  if (!(lr >= 0.0)) throw ParamError("sgd_step: learning rate must be non-negative");
  for (const auto& [key, g] : grads) {
    Tensor2* p = find_param(key);
    if (p == nullptr) throw UsageError("sgd_step: no parameter named " + key);
    check_same_shape(*p, g, "sgd_step");
    axpy(*p, -lr, g);
    check_finite(*p, "sgd_step");
  }
}

}  // namespace fedcmi
