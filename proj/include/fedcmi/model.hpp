#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fedcmi/autodiff.hpp"
#include "fedcmi/io.hpp"
#include "fedcmi/params.hpp"
#include "fedcmi/tensor.hpp"

namespace fedcmi {

enum class Modality : int { m0 = 0, m1 = 1 };

inline Modality other(Modality m) { return m == Modality::m0 ? Modality::m1 : Modality::m0; }
inline int idx(Modality m) { return static_cast<int>(m); }
inline const char* name(Modality m) { return m == Modality::m0 ? "m0" : "m1"; }

enum class Fusion : uint8_t { concat = 0, sum = 1 };
enum class ArchKind : uint8_t { fedcmi = 0, plain = 1 };

struct ArchConfig {
  std::size_t dim_m0 = 0;
  std::size_t dim_m1 = 0;
  std::size_t feature_dim = 16;      // d_z, output of encoders and projectors
  std::size_t encoder_layers = 2;
  std::size_t projector_layers = 2;  // two-layer SP/IP by default
  std::size_t num_classes = 0;
  Fusion fusion = Fusion::concat;
  ArchKind arch = ArchKind::fedcmi;
  uint64_t init_seed = 0;

  std::size_t input_dim(Modality m) const { return m == Modality::m0 ? dim_m0 : dim_m1; }
  std::size_t fused_dim() const {
    return fusion == Fusion::concat ? 2 * feature_dim : feature_dim;
  }

  void validate() const {
    if (dim_m0 == 0 || dim_m1 == 0) throw ParamError("ArchConfig: input dims must be positive");
    if (feature_dim == 0) throw ParamError("ArchConfig: feature_dim must be positive");
    if (encoder_layers == 0 || projector_layers == 0)
      throw ParamError("ArchConfig: layer counts must be positive");
    if (num_classes < 2) throw ParamError("ArchConfig: need at least two classes");
  }
};

// All learnable weights. The fedcmi architecture has per-modality encoders,
// self-projectors (SP), infiltration projectors (IP), shared classifiers (SC)
// and a fused joint classifier; the plain baseline keeps only encoders plus
// the joint head. Everything except the IPs forms the base-module set that is
// exchanged with the server.
struct ModelParams {
  ArchConfig cfg;
  std::array<MlpParams, 2> enc;
  std::array<MlpParams, 2> sp;
  std::array<MlpParams, 2> ip;
  std::array<MlpParams, 2> sc;
  MlpParams joint;
};

namespace detail {

template <typename Mlp, typename Fn>
void visit_mlp(Mlp& mlp, const std::string& module, Fn&& fn) {
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    std::string base = module + ".l" + std::to_string(l) + ".";
    fn(base + "W", mlp.layers[l].w);
    fn(base + "b", mlp.layers[l].b);
  }
}

// Fixed enumeration order; this order is the registry order used by
// checkpoints, gradients and aggregation.
template <typename Model, typename Fn>
void visit_params_impl(Model& p, Fn&& fn) {
  static const char* mods[2] = {"m0", "m1"};
  for (int m = 0; m < 2; ++m) visit_mlp(p.enc[m], std::string("enc_") + mods[m], fn);
  for (int m = 0; m < 2; ++m) visit_mlp(p.sp[m], std::string("sp_") + mods[m], fn);
  for (int m = 0; m < 2; ++m) visit_mlp(p.ip[m], std::string("ip_") + mods[m], fn);
  for (int m = 0; m < 2; ++m) visit_mlp(p.sc[m], std::string("sc_") + mods[m], fn);
  visit_mlp(p.joint, "joint", fn);
}

}  // namespace detail

template <typename Fn>
void visit_params(ModelParams& p, Fn&& fn) {
  detail::visit_params_impl(p, fn);
}

template <typename Fn>
void visit_params(const ModelParams& p, Fn&& fn) {
  detail::visit_params_impl(p, fn);
}

// IP parameters stay on the client; everything else is a base module.
inline bool is_local_only_key(const std::string& key) {
  return key.rfind("ip_", 0) == 0;
}

inline std::string module_of_key(const std::string& key) {
  return key.substr(0, key.find('.'));
}

inline std::vector<std::string> param_keys(const ModelParams& p, bool base_only = false) {
  std::vector<std::string> keys;
  visit_params(p, [&](const std::string& k, const Tensor2&) {
    if (!base_only || !is_local_only_key(k)) keys.push_back(k);
  });
  return keys;
}

inline Tensor2* find_param(ModelParams& p, const std::string& key) {
  Tensor2* found = nullptr;
  visit_params(p, [&](const std::string& k, Tensor2& t) {
    if (k == key) found = &t;
  });
  return found;
}

inline void sgd_step(ModelParams& p, const GradMap& grads, double lr) {
  std::map<std::string, Tensor2*> index;
  visit_params(p, [&](const std::string& k, Tensor2& t) { index.emplace(k, &t); });
  sgd_step_keys(
      [&](const std::string& k) -> Tensor2* {
        auto it = index.find(k);
        return it == index.end() ? nullptr : it->second;
      },
      grads, lr);
}

inline std::size_t param_count(const ModelParams& p, bool base_only = false) {
  std::size_t n = 0;
  visit_params(p, [&](const std::string& k, const Tensor2& t) {
    if (!base_only || !is_local_only_key(k)) n += t.size();
  });
  return n;
}

inline ModelParams init_model(const ArchConfig& cfg) {
  cfg.validate();
  ModelParams p;
  p.cfg = cfg;
  for (int m = 0; m < 2; ++m) {
    Modality mod = static_cast<Modality>(m);
    std::vector<std::size_t> enc_dims{cfg.input_dim(mod)};
    for (std::size_t l = 0; l < cfg.encoder_layers; ++l) enc_dims.push_back(cfg.feature_dim);
    p.enc[m] = init_mlp(enc_dims, cfg.init_seed, std::string("enc_") + name(mod));
    if (cfg.arch == ArchKind::fedcmi) {
      std::vector<std::size_t> proj_dims(cfg.projector_layers + 1, cfg.feature_dim);
      p.sp[m] = init_mlp(proj_dims, cfg.init_seed, std::string("sp_") + name(mod));
      p.ip[m] = init_mlp(proj_dims, cfg.init_seed, std::string("ip_") + name(mod));
      p.sc[m] = init_mlp({cfg.feature_dim, cfg.num_classes}, cfg.init_seed,
                         std::string("sc_") + name(mod));
    }
  }
  p.joint = init_mlp({cfg.fused_dim(), cfg.num_classes}, cfg.init_seed, "joint");
  return p;
}

// ---------------------------------------------------------------------------
// Traced forward passes

struct MlpVars {
  std::vector<std::pair<Var, Var>> layers;  // (W, b) per layer
};

struct ModelVars {
  std::array<MlpVars, 2> enc, sp, ip, sc;
  MlpVars joint;
};

inline MlpVars trace_mlp(GradTape& t, const MlpParams& mlp) {
  MlpVars v;
  for (const auto& l : mlp.layers) v.layers.push_back({t.leaf(l.w), t.leaf(l.b)});
  return v;
}

// Registers every parameter tensor as a tape leaf. Gradients for frozen
// modules are simply not applied by the caller.
inline ModelVars trace_params(GradTape& t, const ModelParams& p) {
  ModelVars v;
  for (int m = 0; m < 2; ++m) {
    v.enc[m] = trace_mlp(t, p.enc[m]);
    if (p.cfg.arch == ArchKind::fedcmi) {
      v.sp[m] = trace_mlp(t, p.sp[m]);
      v.ip[m] = trace_mlp(t, p.ip[m]);
      v.sc[m] = trace_mlp(t, p.sc[m]);
    }
  }
  v.joint = trace_mlp(t, p.joint);
  return v;
}

// Collect gradients after backward, keyed like the parameter registry.
inline GradMap collect_grads(const GradTape& t, const ModelVars& v, const ModelParams& p) {
  GradMap g;
  auto take = [&](const MlpVars& mv, const MlpParams& mp, const std::string& module) {
    for (std::size_t l = 0; l < mp.layers.size(); ++l) {
      std::string base = module + ".l" + std::to_string(l) + ".";
      g.emplace(base + "W", t.grad(mv.layers[l].first));
      g.emplace(base + "b", t.grad(mv.layers[l].second));
    }
  };
  for (int m = 0; m < 2; ++m) {
    Modality mod = static_cast<Modality>(m);
    take(v.enc[m], p.enc[m], std::string("enc_") + name(mod));
    if (p.cfg.arch == ArchKind::fedcmi) {
      take(v.sp[m], p.sp[m], std::string("sp_") + name(mod));
      take(v.ip[m], p.ip[m], std::string("ip_") + name(mod));
      take(v.sc[m], p.sc[m], std::string("sc_") + name(mod));
    }
  }
  take(v.joint, p.joint, "joint");
  return g;
}

// Key -> tape variable map mirroring the registry, for losses that pair local
// parameters with global reference tensors.
inline std::map<std::string, Var> var_map(const ModelVars& v, const ModelParams& p,
                                          bool base_only = false) {
  std::map<std::string, Var> out;
  auto take = [&](const MlpVars& mv, const MlpParams& mp, const std::string& module) {
    for (std::size_t l = 0; l < mp.layers.size(); ++l) {
      std::string base = module + ".l" + std::to_string(l) + ".";
      out.emplace(base + "W", mv.layers[l].first);
      out.emplace(base + "b", mv.layers[l].second);
    }
  };
  for (int m = 0; m < 2; ++m) {
    Modality mod = static_cast<Modality>(m);
    take(v.enc[m], p.enc[m], std::string("enc_") + name(mod));
    if (p.cfg.arch == ArchKind::fedcmi) {
      take(v.sp[m], p.sp[m], std::string("sp_") + name(mod));
      if (!base_only) take(v.ip[m], p.ip[m], std::string("ip_") + name(mod));
      take(v.sc[m], p.sc[m], std::string("sc_") + name(mod));
    }
  }
  take(v.joint, p.joint, "joint");
  return out;
}

inline std::map<std::string, const Tensor2*> param_map(const ModelParams& p,
                                                       bool base_only = false) {
  std::map<std::string, const Tensor2*> out;
  visit_params(p, [&](const std::string& k, const Tensor2& t) {
    if (!base_only || !is_local_only_key(k)) out.emplace(k, &t);
  });
  return out;
}

inline Var mlp_forward(GradTape& t, const MlpVars& v, Var x, bool relu_after_last) {
  Var h = x;
  for (std::size_t l = 0; l < v.layers.size(); ++l) {
    h = t.affine(h, v.layers[l].first, v.layers[l].second);
    if (relu_after_last || l + 1 < v.layers.size()) h = t.relu(h);
  }
  return h;
}

struct ForwardVars {
  Var joint_logits;                   // invalid when only one branch was run
  std::array<Var, 2> sp_logits{};    // fedcmi only
  std::array<Var, 2> ip_logits{};    // fedcmi only
  std::array<Var, 2> z{}, z_sp{}, z_ip{};
};

inline Var fuse(GradTape& t, Fusion fusion, Var a, Var b) {
  return fusion == Fusion::concat ? t.concat_cols(a, b) : t.add(a, b);
}

// Full two-modality pass: joint logits through fused SP features, plus the
// per-modality SP and IP branch logits through the shared classifiers.
inline ForwardVars forward_full(GradTape& t, const ModelVars& v, const ArchConfig& cfg,
                                const Tensor2& x_m0, const Tensor2& x_m1) {
  if (x_m0.cols() != cfg.dim_m0 || x_m1.cols() != cfg.dim_m1)
    throw ShapeError("forward_full: input dims do not match ArchConfig");
  if (x_m0.rows() != x_m1.rows()) throw ShapeError("forward_full: modality row counts differ");
  ForwardVars out;
  std::array<Var, 2> x{t.leaf(x_m0), t.leaf(x_m1)};
  for (int m = 0; m < 2; ++m) out.z[m] = mlp_forward(t, v.enc[m], x[m], true);
  if (cfg.arch == ArchKind::fedcmi) {
    for (int m = 0; m < 2; ++m) {
      out.z_sp[m] = mlp_forward(t, v.sp[m], out.z[m], false);
      out.z_ip[m] = mlp_forward(t, v.ip[m], out.z[m], false);
      // SC is literally the same weights for both branches
      out.sp_logits[m] = mlp_forward(t, v.sc[m], out.z_sp[m], false);
      out.ip_logits[m] = mlp_forward(t, v.sc[m], out.z_ip[m], false);
    }
    Var fused = fuse(t, cfg.fusion, out.z_sp[0], out.z_sp[1]);
    out.joint_logits = mlp_forward(t, v.joint, fused, false);
  } else {
    Var fused = fuse(t, cfg.fusion, out.z[0], out.z[1]);
    out.joint_logits = mlp_forward(t, v.joint, fused, false);
  }
  return out;
}

// Single-modality pass. For fedcmi this is the SP branch through the shared
// classifier; for the plain baseline it is the joint head with the other
// modality's fused contribution zeroed. Both serve as the per-modality
// evaluation probe and as the unimodal-client training head.
inline Var forward_unimodal(GradTape& t, const ModelVars& v, const ArchConfig& cfg, Modality m,
                            const Tensor2& x) {
  if (x.cols() != cfg.input_dim(m))
    throw ShapeError("forward_unimodal: input dim does not match ArchConfig");
  Var xm = t.leaf(x);
  Var z = mlp_forward(t, v.enc[idx(m)], xm, true);
  if (cfg.arch == ArchKind::fedcmi) {
    Var z_sp = mlp_forward(t, v.sp[idx(m)], z, false);
    return mlp_forward(t, v.sc[idx(m)], z_sp, false);
  }
  Var zeros = t.leaf(Tensor2(x.rows(), cfg.feature_dim));
  Var fused = m == Modality::m0 ? fuse(t, cfg.fusion, z, zeros) : fuse(t, cfg.fusion, zeros, z);
  return mlp_forward(t, v.joint, fused, false);
}

// ---------------------------------------------------------------------------
// Untraced convenience wrappers (evaluation, monitoring)

struct ForwardOutputs {
  Tensor2 joint_logits;
  std::array<Tensor2, 2> sp_logits, ip_logits;
  std::array<Tensor2, 2> z, z_sp, z_ip;
};

inline ForwardOutputs forward_full(const ModelParams& p, const Tensor2& x_m0,
                                   const Tensor2& x_m1) {
  GradTape t;
  ModelVars v = trace_params(t, p);
  ForwardVars fv = forward_full(t, v, p.cfg, x_m0, x_m1);
  ForwardOutputs out;
  out.joint_logits = t.value(fv.joint_logits);
  if (p.cfg.arch == ArchKind::fedcmi) {
    for (int m = 0; m < 2; ++m) {
      out.sp_logits[m] = t.value(fv.sp_logits[m]);
      out.ip_logits[m] = t.value(fv.ip_logits[m]);
      out.z_sp[m] = t.value(fv.z_sp[m]);
      out.z_ip[m] = t.value(fv.z_ip[m]);
    }
  }
  for (int m = 0; m < 2; ++m) out.z[m] = t.value(fv.z[m]);
  return out;
}

inline Tensor2 forward_unimodal(const ModelParams& p, Modality m, const Tensor2& x) {
  GradTape t;
  ModelVars v = trace_params(t, p);
  return t.value(forward_unimodal(t, v, p.cfg, m, x));
}

// ---------------------------------------------------------------------------
// Checkpoint format: "FCMP" magic, version, ArchConfig header, then ordered
// (key, rows, cols, f64 data) entries, all little-endian. Base-only payloads
// use the same format minus the IP keys.

inline constexpr uint32_t kCheckpointVersion = 1;

inline void write_arch(ByteWriter& w, const ArchConfig& cfg) {
  w.u32(static_cast<uint32_t>(cfg.dim_m0));
  w.u32(static_cast<uint32_t>(cfg.dim_m1));
  w.u32(static_cast<uint32_t>(cfg.feature_dim));
  w.u32(static_cast<uint32_t>(cfg.encoder_layers));
  w.u32(static_cast<uint32_t>(cfg.projector_layers));
  w.u32(static_cast<uint32_t>(cfg.num_classes));
  w.u8(static_cast<uint8_t>(cfg.fusion));
  w.u8(static_cast<uint8_t>(cfg.arch));
  w.u64(cfg.init_seed);
}

inline ArchConfig read_arch(ByteReader& r) {
  ArchConfig cfg;
  cfg.dim_m0 = r.u32();
  cfg.dim_m1 = r.u32();
  cfg.feature_dim = r.u32();
  cfg.encoder_layers = r.u32();
  cfg.projector_layers = r.u32();
  cfg.num_classes = r.u32();
  cfg.fusion = static_cast<Fusion>(r.u8());
  cfg.arch = static_cast<ArchKind>(r.u8());
  cfg.init_seed = r.u64();
  return cfg;
}

namespace detail {

template <typename Keep>
std::vector<uint8_t> serialize_filtered(const ModelParams& p, Keep&& keep) {
  require_little_endian();
  ByteWriter w;
  w.magic("FCMP");
  w.u32(kCheckpointVersion);
  write_arch(w, p.cfg);
  std::vector<std::pair<std::string, const Tensor2*>> entries;
  visit_params(p, [&](const std::string& k, const Tensor2& t) {
    if (keep(k)) entries.push_back({k, &t});
  });
  w.u32(static_cast<uint32_t>(entries.size()));
  for (const auto& [key, t] : entries) {
    w.str(key);
    w.u32(static_cast<uint32_t>(t->rows()));
    w.u32(static_cast<uint32_t>(t->cols()));
    w.f64_block(t->data(), t->size());
  }
  return w.take();
}

}  // namespace detail

inline std::vector<uint8_t> serialize_checkpoint(const ModelParams& p, bool base_only) {
  return detail::serialize_filtered(
      p, [&](const std::string& k) { return !base_only || !is_local_only_key(k); });
}

// Serialize only the modules a client actually contributes, in registry order.
inline std::vector<uint8_t> serialize_modules(const ModelParams& p,
                                              const std::vector<std::string>& modules) {
  return detail::serialize_filtered(p, [&](const std::string& k) {
    for (const auto& m : modules)
      if (module_of_key(k) == m) return true;
    return false;
  });
}

struct Checkpoint {
  ArchConfig cfg;
  std::vector<std::pair<std::string, Tensor2>> entries;

  std::vector<std::string> keys() const {
    std::vector<std::string> ks;
    for (const auto& e : entries) ks.push_back(e.first);
    return ks;
  }
};

inline Checkpoint parse_checkpoint(const std::vector<uint8_t>& bytes) {
  require_little_endian();
  ByteReader r(bytes);
  r.magic("FCMP");
  uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  ck.cfg = read_arch(r);
  uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) {
    std::string key = r.str();
    uint32_t rows = r.u32(), cols = r.u32();
    Tensor2 t(rows, cols);
    r.f64_block(t.data(), t.size());
    ck.entries.push_back({std::move(key), std::move(t)});
  }
  if (!r.at_end()) throw IoError("trailing bytes in checkpoint");
  return ck;
}

// Overwrite the named parameters of an existing model; missing keys are left
// untouched (this is how a base payload lands on a client that owns its IPs).
inline void apply_checkpoint(ModelParams& p, const Checkpoint& ck) {
  for (const auto& [key, t] : ck.entries) {
    Tensor2* dst = find_param(p, key);
    if (dst == nullptr) throw UsageError("apply_checkpoint: no parameter named " + key);
    check_same_shape(*dst, t, "apply_checkpoint");
    *dst = t;
  }
}

}  // namespace fedcmi
