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

#ifndef NES_HARNESS_EXPERIMENT_H_
#define NES_HARNESS_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nes/core/metrics.h"
#include "nes/search/nes.h"
#include "nes/store/synthetic_benchmark.h"
#include "nes/toy/toy_trainer.h"

namespace YAML {
class Node;
}

namespace nes {

enum class Method {
  kNesRs,
  kNesRe,
  kDeepEnsFixed,
  kDeepEnsRs,
  kDeepEnsBest,
  kDeepEnsPlusEs,
  kAnchored,
};

std::string to_string(Method method);
Method parse_method(std::string_view text);

enum class SelectionAlgorithm {
  kForward,
  kForwardWithReplacement,
  kDiverse,
  kQuickAndGreedy,
  kTopM,
  kStacking,
};

std::string to_string(SelectionAlgorithm algorithm);

enum class BenchmarkKind { kSynthetic, kStore, kToy };

struct BenchmarkConfig {
  BenchmarkKind kind = BenchmarkKind::kSynthetic;
  SyntheticBenchmarkConfig synthetic;
  std::filesystem::path store_path;
  std::string toy_space = SearchSpace::mlp_cell().id();
  ToyBenchmarkConfig toy;
  // Toy only: record trained networks under <output_dir>/pool_store and
  // replay them on a rerun.
  bool persist = false;
};

struct ExperimentConfig {
  Method method = Method::kNesRs;
  std::filesystem::path output_dir = "run";
  std::vector<std::uint64_t> seeds = {0};
  std::size_t K = 200;
  std::vector<std::size_t> M = {10};
  std::size_t P = 50;
  std::size_t m = 10;
  // Pool prefixes to evaluate besides K (nes-rs, nes-re).
  std::vector<std::size_t> K_grid;
  std::vector<int> severities = {0};
  SelectionAlgorithm selection = SelectionAlgorithm::kForward;
  double diversity_lambda = 0.0;
  AveragingMode averaging = AveragingMode::kProbability;
  SeverityMix severity_mix = SeverityMix::kClean;
  // Genome for deepens-fixed, deepens+es and anchored.
  std::string architecture;
  double anchored_lambda = 0.4;
  std::size_t workers = 1;
  ExecutionMode mode = ExecutionMode::kSynchronous;
  BenchmarkConfig benchmark;

  static ExperimentConfig from_yaml(const YAML::Node& node);
  static ExperimentConfig from_file(const std::filesystem::path& path);
  std::string to_yaml() const;
  // Throws ConfigError.
  void validate() const;
  std::size_t max_M() const;
};

// One CSV row: an ensemble selected on val@severity, scored on
// test@severity.
struct ResultRow {
  std::uint64_t seed = 0;
  std::string method;
  std::string space;
  std::size_t K = 0;
  std::size_t M = 0;
  int severity = 0;
  EvalReport report;
  std::size_t nets_trained = 0;
  double wall_seconds = 0.0;
};

struct SelectionRecord {
  std::uint64_t seed = 0;
  std::string method;
  std::size_t K = 0;
  std::size_t M = 0;
  int severity = 0;
  double val_nll = 0.0;
  std::vector<std::string> genomes;
  std::vector<std::uint64_t> learner_seeds;
  std::vector<double> weights;  // empty means uniform
};

struct RunOutput {
  std::vector<ResultRow> rows;
  std::vector<SelectionRecord> selections;
};

extern const std::vector<std::string> kResultColumns;

// Runs every seed and writes results.csv, selections.csv and config.yaml
// into config.output_dir.
RunOutput run_experiment(const ExperimentConfig& config);

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

}  // namespace nes

#endif  // NES_HARNESS_EXPERIMENT_H_
