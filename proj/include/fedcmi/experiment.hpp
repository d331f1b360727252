#pragma once

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fedcmi/data.hpp"
#include "fedcmi/federation.hpp"
#include "fedcmi/io.hpp"

namespace fedcmi {

// Shortest decimal string that round-trips to the same double; keeps the CSV
// diff-friendly and bit-exact across reruns.
inline std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Flat key = value config format. Lines are "key = value", '#' starts a
// comment, keys are single flat words. Unknown keys are hard errors so typos
// cannot silently corrupt an experiment.

class KvConfig {
 public:
  static KvConfig parse(const std::string& text) {
    KvConfig kv;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
      std::string key = trim(trimmed.substr(0, eq));
      std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
      if (!kv.values_.emplace(key, value).second)
        throw ConfigError("duplicate key: " + key);
    }
    return kv;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_str(const std::string& key, std::optional<std::string> fallback = {}) {
    auto it = values_.find(key);
    if (it == values_.end()) {
      if (fallback) return *fallback;
      throw ConfigError("missing required key: " + key);
    }
    consumed_.insert(key);
    return it->second;
  }

  double get_double(const std::string& key, std::optional<double> fallback = {}) {
    if (!has(key) && fallback) return *fallback;
    std::string s = get_str(key);
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key " + key + ": not a number: " + s);
    }
  }

  uint64_t get_u64(const std::string& key, std::optional<uint64_t> fallback = {}) {
    if (!has(key) && fallback) return *fallback;
    std::string s = get_str(key);
    uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError("key " + key + ": not a non-negative integer: " + s);
    return v;
  }

  std::size_t get_size(const std::string& key, std::optional<std::size_t> fallback = {}) {
    return static_cast<std::size_t>(
        get_u64(key, fallback ? std::optional<uint64_t>(*fallback) : std::nullopt));
  }

  bool get_bool(const std::string& key, std::optional<bool> fallback = {}) {
    if (!has(key) && fallback) return *fallback;
    std::string s = get_str(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("key " + key + ": expected true/false: " + s);
  }

  // every key must have been consumed by a getter
  void finish() const {
    for (const auto& [k, v] : values_)
      if (!consumed_.count(k)) throw ConfigError("unknown key: " + k);
  }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

// ---------------------------------------------------------------------------
// Experiment configuration: data spec + federation config + heterogeneity
// case. Cases follow the usual grid: A = IID/full modality, B = IID/50%
// modality, C = non-IID/full, D = non-IID/50%.

enum class CaseKind : char { A = 'A', B = 'B', C = 'C', D = 'D' };

inline CaseKind parse_case(const std::string& s) {
  if (s.size() == 1) {
    switch (s[0]) {
      case 'A': return CaseKind::A;
      case 'B': return CaseKind::B;
      case 'C': return CaseKind::C;
      case 'D': return CaseKind::D;
    }
  }
  throw ConfigError("case must be one of A, B, C, D: " + s);
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "fedcmi") return Strategy::fedcmi;
  if (s == "mfedavg") return Strategy::mfedavg;
  if (s == "mfedprox") return Strategy::mfedprox;
  throw ConfigError("strategy must be fedcmi, mfedavg or mfedprox: " + s);
}

inline Fusion parse_fusion(const std::string& s) {
  if (s == "concat") return Fusion::concat;
  if (s == "sum") return Fusion::sum;
  throw ConfigError("fusion must be concat or sum: " + s);
}

inline bool case_iid(CaseKind c) { return c == CaseKind::A || c == CaseKind::B; }
inline double case_both_fraction(CaseKind c) {
  return (c == CaseKind::A || c == CaseKind::C) ? 1.0 : 0.5;
}

inline constexpr uint32_t kConfigVersion = 1;

struct ExperimentConfig {
  DataSpec data;
  FedConfig fed;
  std::size_t feature_dim = 16;
  std::size_t encoder_layers = 2;
  std::size_t projector_layers = 2;
  Fusion fusion = Fusion::concat;
  CaseKind case_kind = CaseKind::A;
  double alpha = 3.0;
  double dropout = 0.0;
  uint64_t seed = 1;
  std::string run_name;
  std::string out_root;
  std::size_t checkpoint_interval = 0;

  // Derived seeds: the dataset depends only on the master seed, so runs that
  // differ in strategy share their data and can be compared.
  void resolve_seeds() {
    data.seed = mix_seed(seed, hash_tag("data"));
    fed.init_seed = mix_seed(seed, hash_tag("init"));
    fed.selection_seed = mix_seed(seed, hash_tag("select"));
    fed.data_seed = mix_seed(seed, hash_tag("batch"));
  }
  uint64_t partition_seed() const { return mix_seed(seed, hash_tag("partition")); }
  uint64_t assign_seed() const { return mix_seed(seed, hash_tag("assign")); }
  uint64_t dropout_seed() const { return mix_seed(seed, hash_tag("dropout")); }

  ArchConfig arch() const {
    ArchConfig a;
    a.dim_m0 = data.dim_m0;
    a.dim_m1 = data.dim_m1;
    a.feature_dim = feature_dim;
    a.encoder_layers = encoder_layers;
    a.projector_layers = projector_layers;
    a.num_classes = data.num_classes;
    a.fusion = fusion;
    a.arch = fed.arch_kind();
    a.init_seed = fed.init_seed;
    return a;
  }

  std::string default_run_name() const {
    return std::string(name(fed.strategy)) + "-case" + static_cast<char>(case_kind) + "-seed" +
           std::to_string(seed);
  }
};

inline std::string default_out_root() {
  if (const char* env = std::getenv("FEDCMI_OUT_ROOT"); env != nullptr && *env != '\0')
    return env;
  return "runs";
}

inline DataSpec parse_data_spec_kv(KvConfig& kv) {
  DataSpec d;
  d.num_classes = kv.get_size("classes", d.num_classes);
  d.dim_m0 = kv.get_size("dim_m0", d.dim_m0);
  d.dim_m1 = kv.get_size("dim_m1", d.dim_m1);
  d.scale_m0 = kv.get_double("scale_m0", d.scale_m0);
  d.scale_m1 = kv.get_double("scale_m1", d.scale_m1);
  d.sigma_m0 = kv.get_double("sigma_m0", d.sigma_m0);
  d.sigma_m1 = kv.get_double("sigma_m1", d.sigma_m1);
  d.n_train = kv.get_size("n_train", d.n_train);
  d.n_test = kv.get_size("n_test", d.n_test);
  return d;
}

// Standalone data-spec file for `gen-data`; the seed is explicit here.
inline DataSpec parse_data_spec(const std::string& text) {
  KvConfig kv = KvConfig::parse(text);
  uint32_t version = static_cast<uint32_t>(kv.get_u64("fedcmi_dataspec_version"));
  if (version != kConfigVersion)
    throw ConfigError("unsupported dataspec version " + std::to_string(version));
  DataSpec d = parse_data_spec_kv(kv);
  d.seed = kv.get_u64("seed", d.seed);
  kv.finish();
  d.validate();
  return d;
}

inline ExperimentConfig parse_experiment_config(const std::string& text) {
  KvConfig kv = KvConfig::parse(text);
  uint32_t version = static_cast<uint32_t>(kv.get_u64("fedcmi_config_version"));
  if (version != kConfigVersion)
    throw ConfigError("unsupported config version " + std::to_string(version));
  ExperimentConfig cfg;
  cfg.data = parse_data_spec_kv(kv);
  cfg.fed.strategy = parse_strategy(kv.get_str("strategy", std::string("fedcmi")));
  cfg.case_kind = parse_case(kv.get_str("case", std::string("A")));
  cfg.alpha = kv.get_double("alpha", cfg.alpha);
  cfg.dropout = kv.get_double("dropout", cfg.dropout);
  cfg.fed.n_clients = kv.get_size("clients", cfg.fed.n_clients);
  cfg.fed.clients_per_round = kv.get_size("clients_per_round", cfg.fed.clients_per_round);
  cfg.fed.rounds = kv.get_size("rounds", cfg.fed.rounds);
  cfg.fed.local_epochs = kv.get_size("local_epochs", cfg.fed.local_epochs);
  cfg.fed.batch_size = kv.get_size("batch_size", cfg.fed.batch_size);
  cfg.fed.lr = kv.get_double("lr", cfg.fed.lr);
  cfg.fed.kappa = kv.get_double("kappa", cfg.fed.kappa);
  cfg.fed.mu = kv.get_double("mu", cfg.fed.mu);
  cfg.fed.temp = kv.get_double("temperature", cfg.fed.temp);
  cfg.fed.beta = kv.get_double("beta", cfg.fed.beta);
  cfg.fed.t_min = kv.get_double("t_min", cfg.fed.t_min);
  cfg.fed.t2_scale = kv.get_bool("kd_t2_scale", cfg.fed.t2_scale);
  cfg.fed.workers = kv.get_size("workers", cfg.fed.workers);
  cfg.feature_dim = kv.get_size("feature_dim", cfg.feature_dim);
  cfg.encoder_layers = kv.get_size("encoder_layers", cfg.encoder_layers);
  cfg.projector_layers = kv.get_size("projector_layers", cfg.projector_layers);
  cfg.fusion = parse_fusion(kv.get_str("fusion", std::string("concat")));
  cfg.seed = kv.get_u64("seed", cfg.seed);
  cfg.run_name = kv.get_str("run_name", std::string(""));
  cfg.out_root = kv.get_str("out_root", std::string(""));
  cfg.checkpoint_interval = kv.get_size("checkpoint_interval", cfg.checkpoint_interval);
  kv.finish();
  if (cfg.run_name.empty()) cfg.run_name = cfg.default_run_name();
  if (cfg.out_root.empty()) cfg.out_root = default_out_root();
  cfg.resolve_seeds();
  cfg.data.validate();
  cfg.fed.validate();
  if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (cfg.dropout < 0.0 || cfg.dropout > 1.0) throw ConfigError("dropout must be in [0,1]");
  return cfg;
}

// Canonical rendering with every default resolved; written next to the
// verbatim input as config.resolved.
inline std::string render_experiment_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "fedcmi_config_version = " << kConfigVersion << "\n";
  out << "classes = " << cfg.data.num_classes << "\n";
  out << "dim_m0 = " << cfg.data.dim_m0 << "\n";
  out << "dim_m1 = " << cfg.data.dim_m1 << "\n";
  out << "scale_m0 = " << fmt_double(cfg.data.scale_m0) << "\n";
  out << "scale_m1 = " << fmt_double(cfg.data.scale_m1) << "\n";
  out << "sigma_m0 = " << fmt_double(cfg.data.sigma_m0) << "\n";
  out << "sigma_m1 = " << fmt_double(cfg.data.sigma_m1) << "\n";
  out << "n_train = " << cfg.data.n_train << "\n";
  out << "n_test = " << cfg.data.n_test << "\n";
  out << "strategy = " << name(cfg.fed.strategy) << "\n";
  out << "case = " << static_cast<char>(cfg.case_kind) << "\n";
  out << "alpha = " << fmt_double(cfg.alpha) << "\n";
  out << "dropout = " << fmt_double(cfg.dropout) << "\n";
  out << "clients = " << cfg.fed.n_clients << "\n";
  out << "clients_per_round = " << cfg.fed.clients_per_round << "\n";
  out << "rounds = " << cfg.fed.rounds << "\n";
  out << "local_epochs = " << cfg.fed.local_epochs << "\n";
  out << "batch_size = " << cfg.fed.batch_size << "\n";
  out << "lr = " << fmt_double(cfg.fed.lr) << "\n";
  out << "kappa = " << fmt_double(cfg.fed.kappa) << "\n";
  out << "mu = " << fmt_double(cfg.fed.mu) << "\n";
  out << "temperature = " << fmt_double(cfg.fed.temp) << "\n";
  out << "beta = " << fmt_double(cfg.fed.beta) << "\n";
  out << "t_min = " << fmt_double(cfg.fed.t_min) << "\n";
  out << "kd_t2_scale = " << (cfg.fed.t2_scale ? "true" : "false") << "\n";
  out << "workers = " << cfg.fed.workers << "\n";
  out << "feature_dim = " << cfg.feature_dim << "\n";
  out << "encoder_layers = " << cfg.encoder_layers << "\n";
  out << "projector_layers = " << cfg.projector_layers << "\n";
  out << "fusion = " << (cfg.fusion == Fusion::concat ? "concat" : "sum") << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "run_name = " << cfg.run_name << "\n";
  out << "out_root = " << cfg.out_root << "\n";
  out << "checkpoint_interval = " << cfg.checkpoint_interval << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Run artifacts

inline std::string hash_hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline uint64_t dataset_fingerprint(const GeneratedData& gen) {
  std::vector<uint8_t> bytes = serialize_dataset(gen.train);
  std::vector<uint8_t> test_bytes = serialize_dataset(gen.test);
  bytes.insert(bytes.end(), test_bytes.begin(), test_bytes.end());
  return fnv1a(bytes);
}

inline ClientAssignment build_assignment(const ExperimentConfig& cfg,
                                         const MultimodalDataset& train) {
  ClientAssignment a;
  if (case_iid(cfg.case_kind))
    a.indices = iid_partition(train.size(), cfg.fed.n_clients, cfg.partition_seed());
  else
    a.indices = dirichlet_partition(train.size(), train.y, cfg.fed.n_clients, cfg.alpha,
                                    cfg.partition_seed());
  a.availability = assign_modalities(cfg.fed.n_clients, case_both_fraction(cfg.case_kind),
                                     cfg.assign_seed());
  if (cfg.dropout > 0.0)
    a.availability = modality_dropout(a.availability, cfg.dropout, cfg.dropout_seed());
  return a;
}

inline std::string metrics_csv_header(std::size_t num_classes) {
  std::string h = "round,joint_acc,acc_m0,acc_m1";
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::string cs = std::to_string(c);
    h += ",class" + cs + "_joint,class" + cs + "_m0,class" + cs + "_m1";
  }
  h += ",loss_ce,loss_ce_m0,loss_ce_m1,loss_rd,loss_prox,loss_total,mean_rho";
  return h;
}

inline std::string metrics_csv_row(const RoundRecord& rec) {
  const RoundMetrics& m = rec.metrics;
  std::string row = std::to_string(rec.round);
  row += "," + fmt_double(m.joint_acc) + "," + fmt_double(m.acc_m0) + "," + fmt_double(m.acc_m1);
  for (const auto& pc : m.per_class)
    row += "," + fmt_double(pc[0]) + "," + fmt_double(pc[1]) + "," + fmt_double(pc[2]);
  row += "," + fmt_double(m.mean_loss.ce_joint) + "," + fmt_double(m.mean_loss.ce_m0) + "," +
         fmt_double(m.mean_loss.ce_m1) + "," + fmt_double(m.mean_loss.rd) + "," +
         fmt_double(m.mean_loss.prox) + "," + fmt_double(m.mean_loss.total) + "," +
         fmt_double(m.mean_rho);
  return row;
}

struct RunArtifacts {
  std::filesystem::path dir;
  uint64_t dataset_hash = 0;
  FedRunResult result;
};

// Runs one experiment end to end and writes a self-describing run directory:
// config.in (verbatim), config.resolved, assignment.csv, metrics.csv,
// summary.txt and optional checkpoints. Re-running the same config overwrites
// the directory with byte-identical content.
inline RunArtifacts run_experiment(const ExperimentConfig& cfg, const std::string& original_text,
                                   const FedRunHooks& hooks = {}) {
  namespace fs = std::filesystem;
  fs::path dir = fs::path(cfg.out_root) / cfg.run_name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());

  write_text_file(dir / "config.in", original_text);
  write_text_file(dir / "config.resolved", render_experiment_config(cfg));

  GeneratedData gen = generate_dataset(cfg.data);
  uint64_t hash = dataset_fingerprint(gen);
  ClientAssignment assignment = build_assignment(cfg, gen.train);

  {
    std::string a = "client,samples,availability\n";
    for (std::size_t i = 0; i < assignment.num_clients(); ++i) {
      const char* av = assignment.availability[i] == Availability::both ? "both"
                       : assignment.availability[i] == Availability::m0_only ? "m0_only"
                                                                             : "m1_only";
      a += std::to_string(i) + "," + std::to_string(assignment.indices[i].size()) + "," + av +
           "\n";
    }
    write_text_file(dir / "assignment.csv", a);
  }

  FedRunHooks run_hooks = hooks;
  if (cfg.checkpoint_interval > 0) {
    auto chained = hooks.on_round_end;
    std::size_t interval = cfg.checkpoint_interval;
    run_hooks.on_round_end = [dir, interval, chained](std::size_t round,
                                                      const ModelParams& global) {
      if ((round + 1) % interval == 0)
        write_file(dir / ("model_round" + std::to_string(round) + ".fcmp"),
                   serialize_checkpoint(global, false));
      if (chained) chained(round, global);
    };
  }
  FedRunResult result = run_federation(cfg.fed, cfg.arch(), gen.train, gen.test, assignment,
                                       run_hooks);

  std::string csv = metrics_csv_header(cfg.data.num_classes) + "\n";
  for (const auto& rec : result.records) csv += metrics_csv_row(rec) + "\n";
  write_text_file(dir / "metrics.csv", csv);

  write_file(dir / "model_final.fcmp", serialize_checkpoint(result.global, false));

  std::size_t best_round = 0;
  double best_joint = -1.0;
  for (const auto& rec : result.records)
    if (rec.metrics.joint_acc > best_joint) {
      best_joint = rec.metrics.joint_acc;
      best_round = rec.round;
    }
  const RoundMetrics* final_m = result.records.empty() ? nullptr : &result.records.back().metrics;

  std::ostringstream s;
  s << "format_version = " << kConfigVersion << "\n";
  s << "strategy = " << name(cfg.fed.strategy) << "\n";
  s << "case = " << static_cast<char>(cfg.case_kind) << "\n";
  s << "seed = " << cfg.seed << "\n";
  s << "dataset_hash = " << hash_hex(hash) << "\n";
  s << "rounds = " << result.records.size() << "\n";
  s << "final_joint_acc = " << fmt_double(final_m ? final_m->joint_acc : 0.0) << "\n";
  s << "final_acc_m0 = " << fmt_double(final_m ? final_m->acc_m0 : 0.0) << "\n";
  s << "final_acc_m1 = " << fmt_double(final_m ? final_m->acc_m1 : 0.0) << "\n";
  s << "best_joint_acc = " << fmt_double(result.records.empty() ? 0.0 : best_joint) << "\n";
  s << "best_round = " << best_round << "\n";
  write_text_file(dir / "summary.txt", s.str());

  return {dir, hash, std::move(result)};
}

// ---------------------------------------------------------------------------
// Cross-run comparison

struct RunSummary {
  std::string dir_name;
  std::string strategy;
  std::string dataset_hash;
  double final_joint = 0.0, final_m0 = 0.0, final_m1 = 0.0, best_joint = 0.0;
  long rounds_to_threshold = -1;
};

inline RunSummary read_run_summary(const std::filesystem::path& dir, double threshold) {
  KvConfig kv = KvConfig::parse(read_text_file(dir / "summary.txt"));
  RunSummary s;
  s.dir_name = dir.filename().string();
  s.strategy = kv.get_str("strategy");
  s.dataset_hash = kv.get_str("dataset_hash");
  s.final_joint = kv.get_double("final_joint_acc");
  s.final_m0 = kv.get_double("final_acc_m0");
  s.final_m1 = kv.get_double("final_acc_m1");
  s.best_joint = kv.get_double("best_joint_acc");

  std::istringstream csv(read_text_file(dir / "metrics.csv"));
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    auto c1 = line.find(',');
    auto c2 = line.find(',', c1 + 1);
    double joint = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    if (joint >= threshold) {
      s.rounds_to_threshold = std::stol(line.substr(0, c1));
      break;
    }
  }
  return s;
}

struct Comparison {
  std::string text;
  std::string csv;
};

// Side-by-side comparison of runs over the same dataset; deltas are against
// the first run. Mismatched dataset hashes are a hard error.
inline Comparison compare_runs(const std::vector<std::filesystem::path>& dirs, double threshold) {
  if (dirs.size() < 2) throw CompareError("need at least two run directories");
  std::vector<RunSummary> rows;
  for (const auto& d : dirs) rows.push_back(read_run_summary(d, threshold));
  for (const auto& r : rows)
    if (r.dataset_hash != rows.front().dataset_hash)
      throw CompareError("dataset hash mismatch: " + rows.front().dir_name + " has " +
                         rows.front().dataset_hash + ", " + r.dir_name + " has " +
                         r.dataset_hash);

  std::ostringstream text, csv;
  csv << "run,strategy,final_joint,best_joint,final_m0,final_m1,rounds_to_threshold,"
         "d_joint,d_m0,d_m1\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-28s %-9s %11s %10s %8s %8s %7s %8s %8s %8s\n", "run",
                "strategy", "final_joint", "best_joint", "acc_m0", "acc_m1", "to_thr", "d_joint",
                "d_m0", "d_m1");
  text << buf << std::string(112, '-') << "\n";
  for (const auto& r : rows) {
    double dj = r.final_joint - rows.front().final_joint;
    double d0 = r.final_m0 - rows.front().final_m0;
    double d1 = r.final_m1 - rows.front().final_m1;
    std::string to_thr = r.rounds_to_threshold < 0 ? "-" : std::to_string(r.rounds_to_threshold);
    std::snprintf(buf, sizeof buf, "%-28s %-9s %11.4f %10.4f %8.4f %8.4f %7s %+8.4f %+8.4f %+8.4f\n",
                  r.dir_name.c_str(), r.strategy.c_str(), r.final_joint, r.best_joint, r.final_m0,
                  r.final_m1, to_thr.c_str(), dj, d0, d1);
    text << buf;
    csv << r.dir_name << "," << r.strategy << "," << fmt_double(r.final_joint) << ","
        << fmt_double(r.best_joint) << "," << fmt_double(r.final_m0) << ","
        << fmt_double(r.final_m1) << "," << to_thr << "," << fmt_double(dj) << ","
        << fmt_double(d0) << "," << fmt_double(d1) << "\n";
  }
  return {text.str(), csv.str()};
}

// Cross product of strategies x seeds from one base config; every run keeps
// the per-seed dataset, so same-seed runs share their dataset hash.
inline std::vector<RunArtifacts> run_sweep(const ExperimentConfig& base,
                                           const std::vector<Strategy>& strategies,
                                           const std::vector<uint64_t>& seeds) {
  if (strategies.empty() || seeds.empty())
    throw ParamError("run_sweep: need at least one strategy and one seed");
  std::vector<RunArtifacts> out;
  for (uint64_t seed : seeds)
    for (Strategy st : strategies) {
      ExperimentConfig cfg = base;
      cfg.seed = seed;
      cfg.fed.strategy = st;
      cfg.resolve_seeds();
      cfg.run_name = cfg.default_run_name();
      out.push_back(run_experiment(cfg, render_experiment_config(cfg)));
    }
  return out;
}

}  // namespace fedcmi
