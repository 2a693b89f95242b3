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

#include "nes/harness/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "harness/csv.h"
#include "nes/error.h"
#include "nes/search/tabular.h"
#include "nes/store/store_source.h"
#include "nes/store/matrix_file.h"

namespace nes {

const std::vector<std::string> kResultColumns = {
    "seed",  "method",     "space",        "K",
    "M",     "severity",   "nll",          "error",
    "ece",   "oracle_nll", "avg_bsl_nll",  "pred_disagreement",
    "nets_trained", "wall_seconds"};

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Owns whatever backs the evaluator of one experiment.
class Benchmark {
 public:
  Benchmark(const ExperimentConfig& config, std::vector<SplitKey> keys) {
    const BenchmarkConfig& b = config.benchmark;
    switch (b.kind) {
      case BenchmarkKind::kSynthetic:
        source_ = std::make_unique<SyntheticBenchmark>(b.synthetic);
        break;
      case BenchmarkKind::kStore: {
        store_ = std::make_unique<PredictionStore>(
            PredictionStore::open(b.store_path));
        source_ = std::make_unique<StoreTabularSource>(*store_);
        const auto present = source_->split_keys();
        for (SplitKey key : keys) {
          if (std::find(present.begin(), present.end(), key) == present.end()) {
            throw DataError("store " + b.store_path.string() + " has no " +
                            to_string(key) + " predictions");
          }
        }
        break;
      }
      case BenchmarkKind::kToy: {
        ToyBenchmarkConfig toy = b.toy;
        toy.severities.clear();
        for (SplitKey key : keys) toy.severities.push_back(key.severity);
        if (config.method == Method::kAnchored) {
          toy.train.anchored = AnchoredConfig{config.anchored_lambda};
        }
        base_ = std::make_unique<ToyEvaluator>(SearchSpace::parse(b.toy_space),
                                               std::move(toy));
        if (b.persist) {
          persist_store_ = std::make_unique<PredictionStore>(
              PredictionStore::open_or_create(config.output_dir / "pool_store",
                                              base_->space().id()));
          persistent_ =
              std::make_unique<PersistentEvaluator>(*base_, *persist_store_);
        }
        return;
      }
    }
    base_ = std::make_unique<TabularEvaluator>(*source_, std::move(keys));
  }

  const Evaluator& evaluator() const {
    return persistent_ ? *persistent_ : *base_;
  }
  const TabularSource* tabular() const { return source_.get(); }

  // deep_ens_best_arch ignores the search seed, so one result per severity
  // serves every seed.
  const SearchResult& best_arch_ensemble(std::size_t m, int severity) const {
    auto it = best_.find(severity);
    if (it == best_.end()) {
      it = best_.emplace(severity, deep_ens_best_arch(*source_, m, severity,
                                                      base_->split_keys()))
               .first;
    }
    return it->second;
  }
  const PersistentEvaluator* persistent() const { return persistent_.get(); }

 private:
  std::unique_ptr<PredictionStore> store_;
  std::unique_ptr<TabularSource> source_;
  std::unique_ptr<Evaluator> base_;
  std::unique_ptr<PredictionStore> persist_store_;
  std::unique_ptr<PersistentEvaluator> persistent_;
  mutable std::map<int, SearchResult> best_;
};

std::vector<SplitKey> required_keys(const ExperimentConfig& config) {
  std::set<int> severities(config.severities.begin(), config.severities.end());
  severities.insert(0);
  if (config.method == Method::kNesRe &&
      config.severity_mix != SeverityMix::kClean) {
    severities.insert(kEvolutionShiftSeverity);
  }
  std::vector<SplitKey> keys;
  for (Split split : {Split::kVal, Split::kTest}) {
    for (int s : severities) keys.push_back({split, s});
  }
  return keys;
}

EnsembleSelection select(const ExperimentConfig& config,
                         const PoolPredictions& pool, const LabelVector& labels,
                         std::size_t m) {
  switch (config.selection) {
    case SelectionAlgorithm::kForward:
      return forward_select(pool, labels, m);
    case SelectionAlgorithm::kForwardWithReplacement:
      return forward_select(pool, labels, m, /*with_replacement=*/true);
    case SelectionAlgorithm::kDiverse:
      return forward_select_diverse(pool, labels, m, config.diversity_lambda);
    case SelectionAlgorithm::kQuickAndGreedy:
      return quick_and_greedy(pool, labels, m);
    case SelectionAlgorithm::kTopM:
      return top_m(pool, labels, m);
    case SelectionAlgorithm::kStacking:
      return stacking_select(pool, labels, m, /*weighted_output=*/true);
  }
  throw std::logic_error("unhandled selection algorithm");
}

std::vector<LearnerId> first_ids(std::size_t begin, std::size_t count) {
  std::vector<LearnerId> ids;
  for (std::size_t i = 0; i < count; ++i) {
    ids.push_back({static_cast<std::uint32_t>(begin + i)});
  }
  return ids;
}

EnsembleSelection uniform(std::vector<LearnerId> ids) {
  EnsembleSelection s;
  s.member_ids = std::move(ids);
  return s;
}

// Everything needed to score one (K, M, severity) cell.
struct Candidate {
  std::size_t K = 0;
  std::size_t M = 0;
  int severity = 0;
  const Pool* pool = nullptr;
  EnsembleSelection selection;
  std::size_t nets_trained = 0;
};

class SeedRunner {
 public:
  SeedRunner(const ExperimentConfig& config, const Benchmark& bench,
             std::uint64_t seed)
      : config_(config), bench_(bench), ev_(bench.evaluator()), seed_(seed) {
    options_.workers = config.workers;
    options_.mode = config.mode;
  }

  void run(RunOutput& out) {
    const auto start = Clock::now();
    std::vector<Candidate> cells = build();
    const double search_seconds = seconds_since(start);
    for (Candidate& cell : cells) score(cell, search_seconds, out);
  }

 private:
  Architecture fixed_architecture() const {
    try {
      return Architecture::parse(ev_.space(), config_.architecture);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("bad architecture '" + config_.architecture +
                        "': " + e.what());
    }
  }

  // Cells that select from a prefix of one pool with the configured
  // algorithm, for every K in the grid.
  std::vector<Candidate> select_from_pool(const Pool& pool) {
    std::vector<std::size_t> grid = config_.K_grid;
    grid.push_back(config_.K);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<Candidate> cells;
    for (std::size_t k : grid) {
      const auto ids = first_ids(0, k);
      for (int s : config_.severities) {
        const PoolPredictions view = pool.view(val_at(s), ids);
        for (std::size_t m : config_.M) {
          cells.push_back({k, m, s, &pool,
                           select(config_, view, ev_.labels(val_at(s)), m), k});
        }
      }
    }
    return cells;
  }

  std::vector<Candidate> build() {
    const int first = config_.severities.front();
    const std::size_t max_m = config_.max_M();
    std::vector<Candidate> cells;
    switch (config_.method) {
      case Method::kNesRs: {
        SearchBudget budget{config_.K, max_m, config_.K, 1, seed_};
        results_.push_back(nes_rs(ev_, budget, first, options_));
        return select_from_pool(results_.back().pool);
      }
      case Method::kNesRe: {
        SearchBudget budget{config_.K, max_m, config_.P, config_.m, seed_};
        results_.push_back(
            nes_re(ev_, budget, config_.severity_mix, first, options_));
        return select_from_pool(results_.back().pool);
      }
      case Method::kDeepEnsPlusEs:
        results_.push_back(deep_ens_fixed(ev_, fixed_architecture(), config_.K,
                                          seed_, options_));
        return select_from_pool(results_.back().pool);
      case Method::kDeepEnsFixed:
      case Method::kAnchored: {
        results_.push_back(
            deep_ens_fixed(ev_, fixed_architecture(), max_m, seed_, options_));
        for (int s : config_.severities) {
          for (std::size_t m : config_.M) {
            cells.push_back({m, m, s, &results_.back().pool,
                             uniform(first_ids(0, m)), m});
          }
        }
        return cells;
      }
      case Method::kDeepEnsRs:
        return build_deep_ens_rs();
      case Method::kDeepEnsBest:
        return build_deep_ens_best();
    }
    throw std::logic_error("unhandled method");
  }

  // The architecture search is shared across severities; only the winner
  // depends on which validation split ranks the candidates.
  std::vector<Candidate> build_deep_ens_rs() {
    const std::size_t k = config_.K;
    const std::size_t max_m = config_.max_M();
    results_.reserve(config_.severities.size() + 1);
    results_.push_back(deep_ens_rs(ev_, k, max_m, config_.severities.front(),
                                   seed_, options_));
    const SearchResult& search = results_.front();
    const auto searched = first_ids(0, k);
    std::vector<Candidate> cells;
    for (int s : config_.severities) {
      const EnsembleSelection best =
          top_m(search.pool.view(val_at(s), searched), ev_.labels(val_at(s)), 1);
      const Architecture& winner = search.pool[best.member_ids.front()].arch;
      const Pool* pool = &search.pool;
      std::size_t offset = k;
      if (winner != search.pool[search.selection.member_ids.front()].arch) {
        results_.push_back(deep_ens_fixed(ev_, winner, max_m, seed_, options_));
        pool = &results_.back().pool;
        offset = 0;
      }
      for (std::size_t m : config_.M) {
        cells.push_back({k, m, s, pool, uniform(first_ids(offset, m)), k + m});
      }
    }
    return cells;
  }

  std::vector<Candidate> build_deep_ens_best() {
    const TabularSource* source = bench_.tabular();
    if (source == nullptr) throw ConfigError("deepens-best needs a table");
    std::vector<Candidate> cells;
    for (int s : config_.severities) {
      const Pool& pool = bench_.best_arch_ensemble(config_.max_M(), s).pool;
      for (std::size_t m : config_.M) {
        cells.push_back({m, m, s, &pool, uniform(first_ids(0, m)), m});
      }
    }
    return cells;
  }

  void score(const Candidate& cell, double search_seconds, RunOutput& out) {
    const auto start = Clock::now();
    const SplitKey val = val_at(cell.severity);
    const SplitKey test = test_at(cell.severity);
    if (val.severity != test.severity) {
      throw std::logic_error("selection and test severities differ");
    }
    std::optional<std::span<const double>> weights;
    if (cell.selection.weights) weights = *cell.selection.weights;

    const PoolPredictions test_view = cell.pool->view(test);
    const EvalReport report =
        evaluate_ensemble(cell.selection.members(test_view), ev_.labels(test),
                          weights, config_.averaging);
    const PoolPredictions val_view = cell.pool->view(val);
    const EvalReport val_report =
        evaluate_ensemble(cell.selection.members(val_view), ev_.labels(val),
                          weights, config_.averaging);

    ResultRow row;
    row.seed = seed_;
    row.method = to_string(config_.method);
    row.space = ev_.space().id();
    row.K = cell.K;
    row.M = cell.M;
    row.severity = cell.severity;
    row.report = report;
    row.nets_trained = cell.nets_trained;
    row.wall_seconds = search_seconds + seconds_since(start);
    out.rows.push_back(row);

    SelectionRecord record;
    record.seed = seed_;
    record.method = row.method;
    record.K = cell.K;
    record.M = cell.M;
    record.severity = cell.severity;
    record.val_nll = val_report.nll;
    for (LearnerId id : cell.selection.member_ids) {
      const BaseLearner& learner = (*cell.pool)[id];
      record.genomes.push_back(learner.arch.to_string(ev_.space()));
      record.learner_seeds.push_back(learner.seed);
    }
    if (cell.selection.weights) record.weights = *cell.selection.weights;
    out.selections.push_back(std::move(record));
  }

  const ExperimentConfig& config_;
  const Benchmark& bench_;
  const Evaluator& ev_;
  std::uint64_t seed_;
  SearchOptions options_;
  std::vector<SearchResult> results_;
};

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

template <typename T>
std::string join(const std::vector<T>& values, char sep) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out << sep;
    if constexpr (std::is_floating_point_v<T>) {
      out << format_double(values[i]);
    } else {
      out << values[i];
    }
  }
  return out.str();
}

void write_selections_csv(const std::filesystem::path& path,
                          const std::vector<SelectionRecord>& records) {
  std::ostringstream out;
  out << "seed,method,K,M,severity,val_nll,genomes,learner_seeds,weights\n";
  for (const auto& r : records) {
    out << r.seed << ',' << csv::quote(r.method) << ',' << r.K << ',' << r.M << ','
        << r.severity << ',' << format_double(r.val_nll) << ','
        << csv::quote(join(r.genomes, ';')) << ',' << join(r.learner_seeds, ';') << ','
        << join(r.weights, ';') << '\n';
  }
  const std::string text = out.str();
  write_file_atomic(path, text);
}

}  // namespace

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << join(kResultColumns, ',') << '\n';
  for (const auto& r : rows) {
    const EvalReport& e = r.report;
    out << r.seed << ',' << csv::quote(r.method) << ',' << csv::quote(r.space)
        << ',' << r.K << ','
        << r.M << ',' << r.severity << ',' << format_double(e.nll) << ','
        << format_double(e.error) << ',' << format_double(e.ece) << ','
        << format_double(e.oracle_nll) << ',' << format_double(e.avg_bsl_nll)
        << ',' << format_double(e.pred_disagreement) << ',' << r.nets_trained
        << ',' << format_double(r.wall_seconds) << '\n';
  }
  const std::string text = out.str();
  write_file_atomic(path, text);
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || csv::split_line(line) != kResultColumns) {
    throw DataError(path.string() + " does not have the results.csv header");
  }
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split_line(line);
    if (f.size() != kResultColumns.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected " + std::to_string(kResultColumns.size()) +
                      " fields");
    }
    try {
      ResultRow r;
      r.seed = std::stoull(f[0]);
      r.method = f[1];
      r.space = f[2];
      r.K = std::stoull(f[3]);
      r.M = std::stoull(f[4]);
      r.severity = std::stoi(f[5]);
      r.report.nll = std::stod(f[6]);
      r.report.error = std::stod(f[7]);
      r.report.ece = std::stod(f[8]);
      r.report.oracle_nll = std::stod(f[9]);
      r.report.avg_bsl_nll = std::stod(f[10]);
      r.report.pred_disagreement = std::stod(f[11]);
      r.nets_trained = std::stoull(f[12]);
      r.wall_seconds = std::stod(f[13]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed number");
    }
  }
  return rows;
}

RunOutput run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Benchmark bench(config, required_keys(config));
  std::filesystem::create_directories(config.output_dir);
  write_file_atomic(config.output_dir / "config.yaml", config.to_yaml());

  RunOutput out;
  for (std::uint64_t seed : config.seeds) {
    spdlog::info("{}: seed {} on {}", to_string(config.method), seed,
                 bench.evaluator().space().id());
    SeedRunner(config, bench, seed).run(out);
  }
  if (const auto* persistent = bench.persistent()) {
    spdlog::info("pool store: {} networks replayed, {} trained",
                 persistent->replayed(), persistent->trained());
  }
  write_results_csv(config.output_dir / "results.csv", out.rows);
  write_selections_csv(config.output_dir / "selections.csv", out.selections);
  return out;
}

}  // namespace nes
