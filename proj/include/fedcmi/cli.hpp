#pragma once

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fedcmi/experiment.hpp"

namespace fedcmi {

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t at = 0;
  while (at <= s.size()) {
    auto comma = s.find(',', at);
    if (comma == std::string::npos) comma = s.size();
    std::string piece = s.substr(at, comma - at);
    if (!piece.empty()) out.push_back(piece);
    at = comma + 1;
  }
  return out;
}

// Entry point shared by the fedcmi binary and the CLI tests. Returns the
// process exit code; all failures print one "error: <kind>: <message>" line.
inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"fedcmi: deterministic multimodal federated learning simulator"};
  app.require_subcommand(1);

  std::string spec_file, out_dir = ".";
  auto* gen = app.add_subcommand("gen-data", "generate a dataset from a data-spec file");
  gen->add_option("spec-file", spec_file, "flat key=value data spec")->required();
  gen->add_option("--out", out_dir, "output directory (default .)");

  std::string config_file, run_name_override, out_root_override, strategy_override;
  std::size_t workers_override = 0;
  uint64_t seed_override = 0;
  bool seed_given = false;
  auto* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("config-file", config_file, "flat key=value experiment config")->required();
  run->add_option("--workers", workers_override, "override worker count");
  run->add_option("--out-root", out_root_override, "override output root");
  run->add_option("--run-name", run_name_override, "override run directory name");
  run->add_option("--seed", seed_override, "override master seed")
      ->each([&](const std::string&) { seed_given = true; });
  run->add_option("--strategy", strategy_override, "override strategy");

  std::vector<std::string> compare_dirs;
  double threshold = 0.5;
  std::string csv_out;
  auto* cmp = app.add_subcommand("compare", "compare finished runs over one dataset");
  cmp->add_option("dirs", compare_dirs, "run directories")->expected(-2);
  cmp->add_option("--threshold", threshold, "joint accuracy for rounds-to-threshold");
  cmp->add_option("--csv", csv_out, "also write the structured table to this file");

  std::string sweep_config, sweep_strategies, sweep_seeds;
  std::string sweep_out_root;
  std::size_t sweep_workers = 0;
  auto* sweep = app.add_subcommand("sweep", "run a strategies x seeds grid from one config");
  sweep->add_option("config-file", sweep_config, "base experiment config")->required();
  sweep->add_option("--strategies", sweep_strategies, "comma list, e.g. mfedavg,fedcmi")
      ->required();
  sweep->add_option("--seeds", sweep_seeds, "comma list of master seeds")->required();
  sweep->add_option("--out-root", sweep_out_root, "override output root");
  sweep->add_option("--workers", sweep_workers, "override worker count");

  try {
    app.parse(argc, argv);

    if (gen->parsed()) {
      DataSpec spec = parse_data_spec(read_text_file(spec_file));
      GeneratedData data = generate_dataset(spec);
      std::filesystem::create_directories(out_dir);
      auto train_path = std::filesystem::path(out_dir) / "train.fcmi";
      auto test_path = std::filesystem::path(out_dir) / "test.fcmi";
      write_file(train_path, serialize_dataset(data.train));
      write_file(test_path, serialize_dataset(data.test));
      std::cout << "dataset_hash = " << hash_hex(dataset_fingerprint(data)) << "\n";
      std::cout << "train = " << train_path.string() << " (n=" << data.train.size() << ")\n";
      std::cout << "test = " << test_path.string() << " (n=" << data.test.size() << ")\n";
    } else if (run->parsed()) {
      std::string text = read_text_file(config_file);
      ExperimentConfig cfg = parse_experiment_config(text);
      bool named_in_file = KvConfig::parse(text).has("run_name");
      if (seed_given) cfg.seed = seed_override;
      if (!strategy_override.empty()) cfg.fed.strategy = parse_strategy(strategy_override);
      if (workers_override > 0) cfg.fed.workers = workers_override;
      if (!out_root_override.empty()) cfg.out_root = out_root_override;
      if (!run_name_override.empty())
        cfg.run_name = run_name_override;
      else if (!named_in_file)
        cfg.run_name = cfg.default_run_name();
      cfg.resolve_seeds();
      cfg.fed.validate();
      RunArtifacts art = run_experiment(cfg, text);
      const auto& records = art.result.records;
      std::cout << "run_dir = " << art.dir.string() << "\n";
      std::cout << "dataset_hash = " << hash_hex(art.dataset_hash) << "\n";
      if (!records.empty()) {
        const RoundMetrics& m = records.back().metrics;
        std::cout << "final_joint_acc = " << fmt_double(m.joint_acc) << "\n";
        std::cout << "final_acc_m0 = " << fmt_double(m.acc_m0) << "\n";
        std::cout << "final_acc_m1 = " << fmt_double(m.acc_m1) << "\n";
      }
    } else if (cmp->parsed()) {
      std::vector<std::filesystem::path> dirs(compare_dirs.begin(), compare_dirs.end());
      Comparison c = compare_runs(dirs, threshold);
      std::cout << c.text;
      if (!csv_out.empty()) write_text_file(csv_out, c.csv);
    } else if (sweep->parsed()) {
      std::string text = read_text_file(sweep_config);
      ExperimentConfig base = parse_experiment_config(text);
      if (!sweep_out_root.empty()) base.out_root = sweep_out_root;
      if (sweep_workers > 0) base.fed.workers = sweep_workers;
      std::vector<Strategy> strategies;
      for (const auto& s : split_commas(sweep_strategies)) strategies.push_back(parse_strategy(s));
      std::vector<uint64_t> seeds;
      for (const auto& s : split_commas(sweep_seeds)) {
        uint64_t v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
          throw ConfigError("--seeds: not an integer: " + s);
        seeds.push_back(v);
      }
      std::vector<RunArtifacts> runs = run_sweep(base, strategies, seeds);
      for (const auto& r : runs)
        std::cout << "run_dir = " << r.dir.string() << " dataset_hash = "
                  << hash_hex(r.dataset_hash) << "\n";
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fedcmi
