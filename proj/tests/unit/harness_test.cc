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

#include <filesystem>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>

#include <gtest/gtest.h>
#include <yaml-cpp/yaml.h>

#include "nes/error.h"
#include "nes/harness/summarize.h"
#include "nes/store/prediction_store.h"

namespace nes {
namespace {

namespace fs = std::filesystem;

class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("nes_harness_" + std::string(::testing::UnitTest::GetInstance()
                                              ->current_test_info()
                                              ->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  // 125-genome benchmark with 120 points; every lookup is cheap.
  ExperimentConfig small(Method method, const std::string& name) const {
    ExperimentConfig c;
    c.method = method;
    c.output_dir = root_ / name;
    c.seeds = {0, 1};
    c.K = 30;
    c.M = {1, 3};
    c.P = 10;
    c.m = 5;
    c.severities = {0, 5};
    c.benchmark.synthetic.cell_nodes = 3;
    c.benchmark.synthetic.num_points = 120;
    return c;
  }

  static ExperimentConfig parse(const std::string& yaml) {
    return ExperimentConfig::from_yaml(YAML::Load(yaml));
  }

  fs::path root_;
};

bool same_metrics(const ResultRow& a, const ResultRow& b) {
  return a.seed == b.seed && a.method == b.method && a.space == b.space &&
         a.K == b.K && a.M == b.M && a.severity == b.severity &&
         a.report.nll == b.report.nll && a.report.error == b.report.error &&
         a.report.ece == b.report.ece &&
         a.report.oracle_nll == b.report.oracle_nll &&
         a.report.avg_bsl_nll == b.report.avg_bsl_nll &&
         a.report.pred_disagreement == b.report.pred_disagreement &&
         a.nets_trained == b.nets_trained;
}

TEST_F(HarnessTest, ParsesFullConfig) {
  const auto c = parse(R"(
method: nes-re
output_dir: out/re
seeds: [3, 4]
budget: {K: 60, M: [2, 4], P: 20, m: 5, K_grid: [20, 40]}
severities: [0, 3]
selection: {algorithm: diverse, lambda: 0.5, averaging: logit}
severity_mix: alternating
workers: 2
benchmark: {kind: synthetic, gen_seed: 7, cell_nodes: 3, num_points: 80}
)");
  EXPECT_EQ(c.method, Method::kNesRe);
  EXPECT_EQ(c.output_dir, fs::path("out/re"));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4}));
  EXPECT_EQ(c.K, 60u);
  EXPECT_EQ(c.M, (std::vector<std::size_t>{2, 4}));
  EXPECT_EQ(c.K_grid, (std::vector<std::size_t>{20, 40}));
  EXPECT_EQ(c.severities, (std::vector<int>{0, 3}));
  EXPECT_EQ(c.selection, SelectionAlgorithm::kDiverse);
  EXPECT_EQ(c.diversity_lambda, 0.5);
  EXPECT_EQ(c.averaging, AveragingMode::kLogit);
  EXPECT_EQ(c.severity_mix, SeverityMix::kAlternating);
  EXPECT_EQ(c.workers, 2u);
  EXPECT_EQ(c.benchmark.synthetic.gen_seed, 7u);
  EXPECT_EQ(c.benchmark.synthetic.num_points, 80u);
}

TEST_F(HarnessTest, ScalarListsAndDefaults) {
  const auto c = parse("method: nes-rs\nseeds: 5\nbudget: {K: 10, M: 2}\n");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{5}));
  EXPECT_EQ(c.M, (std::vector<std::size_t>{2}));
  EXPECT_EQ(c.severities, (std::vector<int>{0}));
  EXPECT_EQ(c.benchmark.kind, BenchmarkKind::kSynthetic);
}

TEST_F(HarnessTest, YamlRoundTrip) {
  for (const auto& c :
       {small(Method::kNesRs, "a"), small(Method::kDeepEnsBest, "b")}) {
    const auto back = ExperimentConfig::from_yaml(YAML::Load(c.to_yaml()));
    EXPECT_EQ(back.to_yaml(), c.to_yaml());
  }
  auto toy = parse(R"(
method: anchored
architecture: "|linear~0|"
anchored_lambda: 0.25
benchmark:
  kind: toy
  space: "mlp-cell:1:linear,identity"
  persist: true
  task: {num_train: 64, overlap: 0.5}
  train: {epochs: 3, learning_rate: 0.02}
)");
  const auto back = ExperimentConfig::from_yaml(YAML::Load(toy.to_yaml()));
  EXPECT_EQ(back.to_yaml(), toy.to_yaml());
  EXPECT_EQ(back.benchmark.toy.task.num_train, 64u);
  EXPECT_EQ(back.benchmark.toy.train.epochs, 3u);
  EXPECT_TRUE(back.benchmark.persist);
}

TEST_F(HarnessTest, RejectsBadConfigs) {
  const std::vector<std::string> bad = {
      "budget: {K: 10}\n",                                  // no method
      "method: nes-xx\n",                                   // unknown method
      "method: nes-rs\nbudgt: {K: 10}\n",                   // misspelled key
      "method: nes-rs\nbudget: {K: 2, M: 3}\n",             // K < M
      "method: nes-rs\nbudget: {K: 10, M: 0}\n",            // M = 0
      "method: nes-rs\nseverities: [0, 6]\n",               // bad severity
      "method: nes-rs\nseverities: [0, 0]\n",               // repeated
      "method: nes-rs\nseeds: []\n",                        // no seeds
      "method: nes-rs\nbudget: {K: 10, M: 2, K_grid: [1]}\n",  // below M
      "method: nes-re\nbudget: {K: 10, M: 2, P: 20, m: 5}\n",  // P > K
      "method: deepens-fixed\n",                            // no architecture
      "method: deepens-fixed\narchitecture: x\nbudget: {K_grid: [5]}\n",
      "method: anchored\narchitecture: x\n",                // needs toy
      "method: deepens-best\nbenchmark: {kind: toy}\n",     // needs a table
      "method: nes-rs\nbenchmark: {kind: store}\n",         // no path
      "method: nes-rs\nbenchmark: {kind: synthetic, num_families: 9}\n",
      "method: nes-rs\nbenchmark: {kind: toy, space: bogus}\n",
      "method: nes-rs\nbenchmark: {kind: toy, train: {momentum: 1.5}}\n",
      "method: nes-rs\nselection: {algorithm: magic}\n",
      "method: nes-rs\nworkers: 0\n",
      "method: nes-rs\nbudget: {K: ten}\n",
      "method: nes-rs\nmode: asynchronous\nbudget: {K: 10, M: 2, K_grid: [5]}\n",
  };
  for (const auto& text : bad) {
    EXPECT_THROW(parse(text), ConfigError) << text;
  }
  EXPECT_THROW(ExperimentConfig::from_file(root_ / "missing.yaml"), ConfigError);
  fs::create_directories(root_);
  std::ofstream(root_ / "broken.yaml") << "method: [unclosed\n";
  EXPECT_THROW(ExperimentConfig::from_file(root_ / "broken.yaml"), ConfigError);
}

TEST_F(HarnessTest, RunWritesEveryCell) {
  auto c = small(Method::kNesRs, "rs");
  c.K_grid = {10, 20};
  const RunOutput out = run_experiment(c);
  // seeds x K values x M values x severities
  EXPECT_EQ(out.rows.size(), 2u * 3 * 2 * 2);
  EXPECT_EQ(out.selections.size(), out.rows.size());
  for (const char* file : {"results.csv", "selections.csv", "config.yaml"}) {
    EXPECT_TRUE(fs::exists(c.output_dir / file)) << file;
  }
  const auto rows = read_results_csv(c.output_dir / "results.csv");
  ASSERT_EQ(rows.size(), out.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_TRUE(same_metrics(rows[i], out.rows[i])) << i;
    EXPECT_EQ(rows[i].wall_seconds, out.rows[i].wall_seconds);
    EXPECT_EQ(rows[i].nets_trained, rows[i].K);
    EXPECT_EQ(out.selections[i].genomes.size(), rows[i].M);
  }
  EXPECT_EQ(ExperimentConfig::from_file(c.output_dir / "config.yaml").to_yaml(),
            c.to_yaml());
}

// Each row must be selected on val@s and scored on test@s: recompute both
// from the recorded members.
TEST_F(HarnessTest, SelectionAndTestSeveritiesMatch) {
  auto c = small(Method::kNesRs, "pairing");
  c.severities = {0, 2, 5};
  const RunOutput out = run_experiment(c);
  const SyntheticBenchmark bench(c.benchmark.synthetic);
  const auto& space = bench.space();
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const ResultRow& row = out.rows[i];
    const SelectionRecord& sel = out.selections[i];
    ASSERT_EQ(sel.severity, row.severity);
    std::vector<PredictionMatrix> val, test;
    for (std::size_t j = 0; j < sel.genomes.size(); ++j) {
      const auto arch = Architecture::parse(space, sel.genomes[j]);
      const std::size_t stored = sel.learner_seeds[j] % bench.seeds_per_arch();
      val.push_back(bench.predictions(arch, stored, val_at(row.severity)));
      test.push_back(bench.predictions(arch, stored, test_at(row.severity)));
    }
    auto members = [](const std::vector<PredictionMatrix>& ms) {
      MemberList list;
      for (const auto& m : ms) list.push_back(std::cref(m));
      return list;
    };
    const EvalReport t =
        evaluate_ensemble(members(test), bench.labels(test_at(row.severity)));
    const EvalReport v =
        evaluate_ensemble(members(val), bench.labels(val_at(row.severity)));
    EXPECT_DOUBLE_EQ(t.nll, row.report.nll);
    EXPECT_DOUBLE_EQ(t.error, row.report.error);
    EXPECT_DOUBLE_EQ(v.nll, sel.val_nll);
  }
}

TEST_F(HarnessTest, RerunIsIdenticalApartFromWallTime) {
  for (Method method : {Method::kNesRs, Method::kNesRe, Method::kDeepEnsRs}) {
    auto c = small(method, "first");
    const auto a = run_experiment(c);
    c.output_dir = root_ / "second";
    const auto b = run_experiment(c);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      EXPECT_TRUE(same_metrics(a.rows[i], b.rows[i])) << to_string(method);
    }
  }
}

TEST_F(HarnessTest, KGridPrefixMatchesSmallerBudget) {
  for (Method method : {Method::kNesRs, Method::kNesRe}) {
    auto big = small(method, "big");
    big.K_grid = {15};
    auto little = small(method, "little");
    little.K = 15;
    const auto a = run_experiment(big);
    const auto b = run_experiment(little);
    std::vector<ResultRow> prefix;
    for (const auto& row : a.rows) {
      if (row.K == 15) prefix.push_back(row);
    }
    ASSERT_EQ(prefix.size(), b.rows.size());
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      EXPECT_TRUE(same_metrics(prefix[i], b.rows[i])) << to_string(method);
    }
  }
}

TEST_F(HarnessTest, ValidationNllNonIncreasingInKForSingleMembers) {
  auto c = small(Method::kNesRs, "k");
  c.K = 60;
  c.K_grid = {5, 10, 20, 40};
  c.M = {1};
  c.seeds = {0, 1, 2};
  const auto out = run_experiment(c);
  const auto steps = validation_vs_K(out.selections);
  EXPECT_EQ(steps.size(), 3u * 2 * 4);
  for (const auto& step : steps) EXPECT_TRUE(step.non_increasing());
}

TEST_F(HarnessTest, BaselineShapes) {
  auto fixed = small(Method::kDeepEnsFixed, "fixed");
  fixed.architecture = "|linear_relu~0|+|identity~0|linear~1|";
  for (const auto& row : run_experiment(fixed).rows) {
    EXPECT_EQ(row.K, row.M);
    EXPECT_EQ(row.nets_trained, row.M);
  }

  auto best = small(Method::kDeepEnsBest, "best");
  best.M = {1, 2, 3};
  const auto rows = run_experiment(best).rows;
  std::map<std::tuple<std::size_t, int>, std::set<double>> by_cell;
  for (const auto& row : rows) by_cell[{row.M, row.severity}].insert(row.report.nll);
  for (const auto& [cell, values] : by_cell) EXPECT_EQ(values.size(), 1u);

  best.M = {4};
  EXPECT_THROW(run_experiment(best), DataError);

  auto rs = small(Method::kDeepEnsRs, "drs");
  for (const auto& row : run_experiment(rs).rows) {
    EXPECT_EQ(row.nets_trained, rs.K + row.M);
  }

  auto es = small(Method::kDeepEnsPlusEs, "es");
  es.architecture = fixed.architecture;
  es.selection = SelectionAlgorithm::kForwardWithReplacement;
  EXPECT_EQ(run_experiment(es).rows.size(), 2u * 2 * 2);

  es.architecture = "|nope~0|";
  EXPECT_THROW(run_experiment(es), ConfigError);
}

TEST_F(HarnessTest, SingleMemberDeepEnsembleReportsStoredNll) {
  auto c = small(Method::kDeepEnsFixed, "m1");
  c.M = {1};
  c.architecture = "|linear_tanh~0|+|linear~0|identity~1|";
  const auto out = run_experiment(c);
  const SyntheticBenchmark bench(c.benchmark.synthetic);
  const auto arch = Architecture::parse(bench.space(), c.architecture);
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const auto& row = out.rows[i];
    const std::size_t stored =
        out.selections[i].learner_seeds.front() % bench.seeds_per_arch();
    EXPECT_EQ(row.report.nll,
              nll(bench.predictions(arch, stored, test_at(row.severity)),
                  bench.labels(test_at(row.severity))));
  }
}

TEST_F(HarnessTest, SummaryMeanMatchesRawColumn) {
  auto c = small(Method::kNesRs, "ten");
  c.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  run_experiment(c);
  const auto rows = read_results_csv(c.output_dir / "results.csv");
  const auto out = summarize({c.output_dir}, root_ / "summary");
  std::size_t checked = 0;
  for (const auto& cell : out.cells) {
    if (cell.metric != "nll" && cell.metric != "ece") continue;
    double sum = 0.0;
    int n = 0;
    for (const auto& row : rows) {
      if (row.M != cell.M || row.severity != cell.severity) continue;
      sum += cell.metric == "nll" ? row.report.nll : row.report.ece;
      ++n;
    }
    EXPECT_EQ(n, 10);
    EXPECT_NEAR(cell.value.mean, sum / n, 1e-12);
    ++checked;
  }
  EXPECT_EQ(checked, 2u * 2 * 2);
}

TEST_F(HarnessTest, EverySelectionAlgorithmRuns) {
  for (auto algorithm :
       {SelectionAlgorithm::kForward, SelectionAlgorithm::kForwardWithReplacement,
        SelectionAlgorithm::kDiverse, SelectionAlgorithm::kQuickAndGreedy,
        SelectionAlgorithm::kTopM, SelectionAlgorithm::kStacking}) {
    auto c = small(Method::kNesRs, "alg");
    c.selection = algorithm;
    c.diversity_lambda = 0.2;
    c.seeds = {0};
    const auto out = run_experiment(c);
    ASSERT_EQ(out.rows.size(), 4u) << to_string(algorithm);
    for (const auto& row : out.rows) {
      EXPECT_TRUE(std::isfinite(row.report.nll)) << to_string(algorithm);
    }
  }
}

TEST_F(HarnessTest, StoreBenchmarkNeedsRequestedSplits) {
  SyntheticBenchmarkConfig sc;
  sc.cell_nodes = 2;
  sc.num_points = 50;
  const SyntheticBenchmark bench(sc);
  auto store = PredictionStore::create(root_ / "store", bench.space().id());
  materialize(bench, store, {val_at(0), test_at(0)});

  ExperimentConfig c;
  c.method = Method::kNesRs;
  c.output_dir = root_ / "out";
  c.K = 10;
  c.M = {2};
  c.benchmark.kind = BenchmarkKind::kStore;
  c.benchmark.store_path = root_ / "store";
  EXPECT_EQ(run_experiment(c).rows.size(), 1u);

  c.severities = {0, 5};
  EXPECT_THROW(run_experiment(c), DataError);
  c.benchmark.store_path = root_ / "absent";
  EXPECT_THROW(run_experiment(c), DataError);
}

ExperimentConfig tiny_toy(const fs::path& out) {
  ExperimentConfig c;
  c.method = Method::kNesRs;
  c.output_dir = out;
  c.seeds = {0};
  c.K = 4;
  c.M = {2};
  c.severities = {0, 5};
  c.benchmark.kind = BenchmarkKind::kToy;
  c.benchmark.toy_space = "mlp-cell:2:linear_relu,identity,linear";
  c.benchmark.toy.task.num_train = 128;
  c.benchmark.toy.task.num_val = 64;
  c.benchmark.toy.task.num_test = 64;
  c.benchmark.toy.hidden_width = 8;
  c.benchmark.toy.macro_depth = 1;
  c.benchmark.toy.train.epochs = 2;
  c.benchmark.persist = true;
  return c;
}

// A run interrupted after two networks resumes from the pool store and
// ends bit-identical to an uninterrupted run.
TEST_F(HarnessTest, ToyRunResumesFromPoolStore) {
  const auto fresh = run_experiment(tiny_toy(root_ / "fresh"));

  auto partial = tiny_toy(root_ / "resumed");
  partial.K = 2;
  run_experiment(partial);
  EXPECT_EQ(PredictionStore::open(root_ / "resumed" / "pool_store")
                .manifest()
                .entries.size(),
            2u * 4);
  const auto resumed = run_experiment(tiny_toy(root_ / "resumed"));
  EXPECT_EQ(PredictionStore::open(root_ / "resumed" / "pool_store")
                .manifest()
                .entries.size(),
            4u * 4);
  ASSERT_EQ(fresh.rows.size(), resumed.rows.size());
  for (std::size_t i = 0; i < fresh.rows.size(); ++i) {
    EXPECT_TRUE(same_metrics(fresh.rows[i], resumed.rows[i]));
  }
}

TEST_F(HarnessTest, AnchoredRunsOnToy) {
  auto c = tiny_toy(root_ / "anchored");
  c.method = Method::kAnchored;
  c.benchmark.persist = false;
  c.architecture = "|linear_relu~0|identity~1|+|linear~1|linear_relu~2|";
  const auto rows = run_experiment(c).rows;
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& row : rows) EXPECT_TRUE(std::isfinite(row.report.nll));
}

TEST(MeanCiTest, KnownValues) {
  const std::vector<double> one = {2.5};
  EXPECT_EQ(mean_ci(one).mean, 2.5);
  EXPECT_EQ(mean_ci(one).half_width, 0.0);
  const std::vector<double> values = {1.0, 2.0, 3.0, 4.0};
  const MeanCi ci = mean_ci(values);
  EXPECT_DOUBLE_EQ(ci.mean, 2.5);
  // sample sd sqrt(5/3), stderr sqrt(5/3)/2
  EXPECT_NEAR(ci.half_width, 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(ci.n, 4u);
}

ResultRow row(const std::string& method, std::uint64_t seed, std::size_t m,
              int severity, double nll) {
  ResultRow r;
  r.method = method;
  r.space = "tabular-cell:2:a,b";
  r.seed = seed;
  r.K = 10;
  r.M = m;
  r.severity = severity;
  r.report.nll = nll;
  return r;
}

TEST(SummarizeTest, AggregatesOverSeeds) {
  const std::vector<ResultRow> rows = {row("a", 0, 3, 0, 1.0),
                                       row("a", 1, 3, 0, 2.0),
                                       row("b", 0, 3, 0, 5.0),
                                       row("b", 1, 3, 0, 5.0)};
  const auto cells = summarize_rows(rows);
  std::map<std::string, MeanCi> nll;
  for (const auto& c : cells) {
    if (c.metric == "nll") nll[c.method] = c.value;
  }
  EXPECT_DOUBLE_EQ(nll["a"].mean, 1.5);
  EXPECT_NEAR(nll["a"].half_width, 1.96 * std::sqrt(0.5) / std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(nll["b"].mean, 5.0);
  EXPECT_EQ(nll["b"].half_width, 0.0);
}

TEST(SummarizeTest, RejectsMismatchedGrids) {
  // different seeds
  EXPECT_THROW(summarize_rows({row("a", 0, 3, 0, 1), row("b", 1, 3, 0, 1)}),
               DataError);
  // different M grid
  EXPECT_THROW(summarize_rows({row("a", 0, 3, 0, 1), row("b", 0, 5, 0, 1)}),
               DataError);
  // different severity grid
  EXPECT_THROW(summarize_rows({row("a", 0, 3, 0, 1), row("b", 0, 3, 5, 1)}),
               DataError);
  // the same cell twice
  EXPECT_THROW(summarize_rows({row("a", 0, 3, 0, 1), row("a", 0, 3, 0, 2)}),
               DataError);
  // a seed missing from one cell
  EXPECT_THROW(summarize_rows({row("a", 0, 3, 0, 1), row("a", 1, 3, 0, 1),
                               row("a", 0, 3, 5, 1)}),
               DataError);
  EXPECT_THROW(summarize_rows({}), DataError);
}

TEST_F(HarnessTest, SummarizeWritesSeriesAndCharts) {
  auto rs = small(Method::kNesRs, "rs");
  rs.K_grid = {10};
  run_experiment(rs);
  auto best = small(Method::kDeepEnsBest, "best");
  run_experiment(best);
  const auto out = summarize({root_ / "rs", root_ / "best"}, root_ / "summary");
  for (const char* file :
       {"summary.csv", "series_vs_M.csv", "series_vs_severity.csv",
        "series_vs_K.csv", "validation_vs_K.csv", "nll_vs_M_sev0.svg",
        "nll_vs_severity_M3.svg", "nll_vs_K_M3_sev5.svg"}) {
    EXPECT_TRUE(fs::exists(root_ / "summary" / file)) << file;
  }
  EXPECT_EQ(out.k_steps.size(), 2u * 2 * 2);

  auto other = small(Method::kNesRe, "re");
  other.severities = {0};
  run_experiment(other);
  EXPECT_THROW(summarize({root_ / "rs", root_ / "re"}, root_ / "s2"), DataError);
  EXPECT_THROW(summarize({root_ / "absent"}, root_ / "s3"), DataError);
}

TEST_F(HarnessTest, ResultsCsvRejectsMalformedFiles) {
  fs::create_directories(root_);
  std::ofstream(root_ / "bad_header.csv") << "seed,method\n0,x\n";
  EXPECT_THROW(read_results_csv(root_ / "bad_header.csv"), DataError);
  std::vector<ResultRow> rows = {row("a", 0, 3, 0, 1.25)};
  rows[0].report.pred_disagreement = std::numeric_limits<double>::infinity();
  write_results_csv(root_ / "ok.csv", rows);
  const auto back = read_results_csv(root_ / "ok.csv");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].space, rows[0].space);
  EXPECT_TRUE(std::isinf(back[0].report.pred_disagreement));
  {
    std::ofstream out(root_ / "ok.csv", std::ios::app);
    out << "1,a,x,1,1,0,notanumber,0,0,0,0,0,1,0\n";
  }
  EXPECT_THROW(read_results_csv(root_ / "ok.csv"), DataError);
}

}  // namespace
}  // namespace nes
