// Copyright 2026 The NES Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: generate-benchmark, import, run, summarize and
// verify-store. Exit status 0 on success, 2 on configuration errors, 3 on
// data errors, 1 on anything else.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "nes/error.h"
#include "nes/harness/experiment.h"
#include "nes/harness/summarize.h"
#include "nes/store/prediction_store.h"
#include "nes/store/synthetic_benchmark.h"
#include "nes/store/tabular_import.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

int generate_benchmark(nes::SyntheticBenchmarkConfig config,
                       const std::vector<int>& severities,
                       const std::string& out) {
  config.validate();
  const nes::SyntheticBenchmark bench(config);
  std::vector<nes::SplitKey> keys;
  for (nes::Split split : {nes::Split::kVal, nes::Split::kTest}) {
    for (int s : severities) {
      if (s < 0 || s > nes::kMaxSeverity) {
        throw nes::ConfigError("severity " + std::to_string(s) + " outside 0..5");
      }
      keys.push_back({split, s});
    }
  }
  auto store = nes::PredictionStore::create(out, bench.space().id());
  const auto manifest = nes::materialize(bench, store, keys);
  std::cout << "wrote " << manifest.entries.size() << " matrices for "
            << bench.space().id() << " to " << out << "\n";
  return 0;
}

int verify_store(const std::string& path) {
  const auto store = nes::PredictionStore::open(path);
  const nes::VerifyReport report = store.verify();
  for (const auto& problem : report.problems) std::cout << problem << "\n";
  std::cout << report.entries_checked << " entries checked, "
            << report.problems.size() << " problems\n";
  return report.ok() ? 0 : kExitData;
}

int run(const std::string& config_path, const std::string& output,
        std::size_t workers) {
  auto config = nes::ExperimentConfig::from_file(config_path);
  if (!output.empty()) config.output_dir = output;
  if (workers > 0) config.workers = workers;
  const nes::RunOutput out = nes::run_experiment(config);
  std::cout << out.rows.size() << " rows written to "
            << (config.output_dir / "results.csv").string() << "\n";
  return 0;
}

int summarize(const std::vector<std::string>& runs, const std::string& out) {
  std::vector<std::filesystem::path> dirs(runs.begin(), runs.end());
  const auto summary = nes::summarize(dirs, out);
  std::size_t increases = 0;
  for (const auto& step : summary.k_steps) increases += !step.non_increasing();
  if (!summary.k_steps.empty()) {
    std::cout << "validation NLL vs K: " << increases << " of "
              << summary.k_steps.size() << " steps increased\n";
  }
  std::cout << "wrote " << summary.files.size() << " files to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural ensemble search experiments"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  nes::SyntheticBenchmarkConfig synthetic;
  synthetic.cell_nodes = 3;
  std::vector<int> severities = {0, 5};
  std::string bench_out;
  auto* gen = app.add_subcommand("generate-benchmark",
                                 "Materialize a synthetic tabular benchmark");
  gen->add_option("--out", bench_out, "Store directory to create")->required();
  gen->add_option("--gen-seed", synthetic.gen_seed);
  gen->add_option("--families", synthetic.num_families);
  gen->add_option("--nodes", synthetic.cell_nodes, "Cell nodes (default 3)");
  gen->add_option("--ops", synthetic.num_ops);
  gen->add_option("--seeds", synthetic.seeds_per_arch, "Seeds per architecture");
  gen->add_option("--points", synthetic.num_points);
  gen->add_option("--classes", synthetic.num_classes);
  gen->add_option("--separation", synthetic.separation);
  gen->add_option("--sigma-w", synthetic.sigma_w);
  gen->add_option("--sigma-s", synthetic.sigma_s);
  gen->add_option("--severities", severities)->delimiter(',');

  std::string import_in, import_out;
  auto* imp = app.add_subcommand("import", "Import a tabular JSON export");
  imp->add_option("--input", import_in)->required();
  imp->add_option("--out", import_out)->required();

  std::string config_path, run_output;
  std::size_t workers = 0;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
  run_cmd->add_option("--config", config_path)->required();
  run_cmd->add_option("--output", run_output, "Override output_dir");
  run_cmd->add_option("--workers", workers, "Override workers");

  std::vector<std::string> runs;
  std::string summary_out;
  auto* sum = app.add_subcommand("summarize", "Aggregate run directories");
  sum->add_option("runs", runs, "Run directories")->required();
  sum->add_option("--out", summary_out)->required();

  std::string store_path;
  auto* verify = app.add_subcommand("verify-store", "Check store checksums");
  verify->add_option("store", store_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*gen) return generate_benchmark(synthetic, severities, bench_out);
    if (*imp) {
      const auto manifest = nes::import_tabular(import_in, import_out);
      std::cout << "imported " << manifest.entries.size() << " matrices into "
                << import_out << "\n";
      return 0;
    }
    if (*run_cmd) return run(config_path, run_output, workers);
    if (*sum) return summarize(runs, summary_out);
    if (*verify) return verify_store(store_path);
  } catch (const nes::ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return kExitConfig;
  } catch (const nes::DataError& e) {
    spdlog::error("data error: {}", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return EXIT_FAILURE;
  }
  return EXIT_FAILURE;
}
