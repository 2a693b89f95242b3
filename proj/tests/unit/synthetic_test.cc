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

#include "nes/store/synthetic_benchmark.h"

#include <cmath>
#include <filesystem>
#include <numeric>

#include <gtest/gtest.h>

#include "nes/core/metrics.h"
#include "nes/error.h"
#include "nes/search/nes.h"
#include "nes/store/store_source.h"

namespace nes {
namespace {

SyntheticBenchmarkConfig small_config(std::uint64_t gen_seed = 0) {
  SyntheticBenchmarkConfig c;
  c.gen_seed = gen_seed;
  c.num_points = 200;
  return c;
}

double argmax_disagreement(const PredictionMatrix& a, const PredictionMatrix& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.num_points(); ++i) d += a.argmax(i) != b.argmax(i);
  return static_cast<double>(d) / static_cast<double>(a.num_points());
}

// Draws an architecture of family g (or any family when g < 0).
Architecture draw(const SyntheticBenchmark& b, Rng& rng, int g) {
  for (;;) {
    auto a = sample_architecture(b.space(), rng);
    if (g < 0 || b.family_of(a) == static_cast<std::size_t>(g)) return a;
  }
}

struct MeanSd {
  double mean, sd;
};
MeanSd mean_sd(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / (v.size() - 1))};
}

TEST(SyntheticBenchmarkTest, ValidatesParameters) {
  auto c = small_config();
  c.sigma_s = 1.5;
  EXPECT_THROW(SyntheticBenchmark{c}, ConfigError);
  c = small_config();
  c.sigma_w = 3.0;
  EXPECT_THROW(SyntheticBenchmark{c}, ConfigError);
  c = small_config();
  c.num_families = 6;
  EXPECT_THROW(SyntheticBenchmark{c}, ConfigError);
  c = small_config();
  c.num_classes = 1;
  EXPECT_THROW(SyntheticBenchmark{c}, ConfigError);
}

TEST(SyntheticBenchmarkTest, DefaultSpaceHas15625Architectures) {
  const SyntheticBenchmark b(small_config());
  EXPECT_EQ(b.space().size(), 15625u);
  EXPECT_EQ(b.split_keys().size(), 12u);
}

TEST(SyntheticBenchmarkTest, DeterministicPerGenSeed) {
  const SyntheticBenchmark a(small_config(3)), b(small_config(3)), c(small_config(4));
  Rng rng(0);
  for (int t = 0; t < 5; ++t) {
    const auto arch = sample_architecture(a.space(), rng);
    for (auto key : {val_at(0), test_at(5)}) {
      EXPECT_EQ(a.predictions(arch, 1, key), b.predictions(arch, 1, key));
      EXPECT_NE(a.predictions(arch, 1, key), c.predictions(arch, 1, key));
    }
  }
  EXPECT_EQ(a.labels(val_at(0)), b.labels(val_at(3)));
}

TEST(SyntheticBenchmarkTest, ZeroSeedNoiseMakesSeedsIdentical) {
  auto c = small_config();
  c.sigma_s = 0.0;
  const SyntheticBenchmark b(c);
  Rng rng(1);
  const auto arch = sample_architecture(b.space(), rng);
  for (auto key : {val_at(0), val_at(5), test_at(2)}) {
    EXPECT_EQ(b.predictions(arch, 0, key), b.predictions(arch, 2, key));
  }
  const SyntheticBenchmark noisy(small_config());
  EXPECT_NE(noisy.predictions(arch, 0, val_at(0)), noisy.predictions(arch, 2, val_at(0)));
}

TEST(SyntheticBenchmarkTest, SingleFamilyLowersDisagreement) {
  double one = 0.0, five = 0.0;
  for (std::uint64_t d = 0; d < 20; ++d) {
    for (std::size_t g : {1u, 5u}) {
      auto c = small_config(d);
      c.num_families = g;
      const SyntheticBenchmark b(c);
      Rng rng(d);
      std::vector<PredictionMatrix> ms;
      for (int k = 0; k < 3; ++k) ms.push_back(b.predictions(draw(b, rng, -1), 0, val_at(0)));
      const double v = predictive_disagreement(as_members(ms), b.labels(val_at(0)));
      (g == 1 ? one : five) += v / 20.0;
    }
  }
  EXPECT_LT(one, five);
}

TEST(SyntheticBenchmarkTest, FamiliesClusterPredictions) {
  std::vector<double> gap_disagreement, gap_oracle;
  for (std::uint64_t d = 0; d < 20; ++d) {
    const SyntheticBenchmark b(small_config(d));
    const auto& y = b.labels(val_at(0));
    Rng rng(100 + d);
    const int g = static_cast<int>(d % 5), h = static_cast<int>((d + 1) % 5);
    const auto a1 = b.predictions(draw(b, rng, g), 0, val_at(0));
    const auto a2 = b.predictions(draw(b, rng, g), 1, val_at(0));
    const auto c1 = b.predictions(draw(b, rng, h), 0, val_at(0));
    gap_disagreement.push_back(argmax_disagreement(a1, c1) - argmax_disagreement(a1, a2));
    const std::vector<PredictionMatrix> within = {a1, a2}, across = {a1, c1};
    gap_oracle.push_back(oracle_nll(as_members(within), y) -
                         oracle_nll(as_members(across), y));
  }
  for (const auto& gaps : {gap_disagreement, gap_oracle}) {
    const auto s = mean_sd(gaps);
    EXPECT_GT(s.mean, 3.0 * s.sd / std::sqrt(20.0)) << s.mean << " " << s.sd;
  }
}

TEST(SyntheticBenchmarkTest, ShiftDegradesMonotonicallyAndKeepsNllOrdering) {
  const SyntheticBenchmark b(small_config());
  Rng rng(7);
  for (int t = 0; t < 5; ++t) {
    const auto arch = sample_architecture(b.space(), rng);
    double previous = -1.0;
    for (int v = 0; v <= 5; ++v) {
      const double value = nll(b.predictions(arch, 0, test_at(v)), b.labels(test_at(v)));
      EXPECT_GT(value, previous);
      previous = value;
    }
  }
  for (int t = 0; t < 20; ++t) {
    std::vector<PredictionMatrix> ms;
    for (int k = 0; k < 4; ++k) {
      ms.push_back(b.predictions(sample_architecture(b.space(), rng), k % 3, val_at(t % 6)));
    }
    EXPECT_TRUE(nll_ordering_check(as_members(ms), b.labels(val_at(0))).holds);
  }
}

TEST(SyntheticBenchmarkTest, BestArchitectureMatchesExhaustiveScan) {
  auto c = small_config();
  c.cell_nodes = 3;
  c.num_ops = 3;
  c.num_families = 3;
  const SyntheticBenchmark b(c);
  double best = 1e300;
  Architecture arg;
  for (const auto& a : enumerate_architectures(b.space())) {
    const double v = nll(b.predictions(a, 0, val_at(0)), b.labels(val_at(0)));
    if (v < best) best = v, arg = a;
  }
  EXPECT_EQ(best_tabular_architecture(b, 0), arg);
  const auto de = deep_ens_best_arch(b, 3, 0, {val_at(0), test_at(0)});
  ASSERT_EQ(de.pool.size(), 3u);
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_EQ(de.pool.learners()[s].arch, arg);
    EXPECT_EQ(de.pool.learners()[s].seed, s);
  }
  EXPECT_THROW(deep_ens_best_arch(b, 4, 0), DataError);
}

TEST(SyntheticBenchmarkTest, SingleArchitectureStore) {
  auto c = small_config();
  c.cell_nodes = 2;
  c.num_ops = 1;
  c.num_families = 1;
  const SyntheticBenchmark b(c);
  const auto de = deep_ens_best_arch(b, 2, 0);
  EXPECT_EQ(de.pool[LearnerId{0}].arch, enumerate_architectures(b.space()).front());
}

TEST(SyntheticBenchmarkTest, MaterializedStoreMatchesSource) {
  auto c = small_config();
  c.cell_nodes = 3;
  c.num_ops = 2;
  c.num_families = 2;
  c.num_points = 30;
  const SyntheticBenchmark b(c);
  const auto root = std::filesystem::temp_directory_path() / "nes_materialize_test";
  std::filesystem::remove_all(root);
  {
    auto store = PredictionStore::create(root, b.space().id());
    const auto manifest = materialize(b, store, {val_at(0), test_at(5)});
    EXPECT_EQ(manifest.entries.size(), 8u * 3u * 2u);
  }
  const auto store = PredictionStore::open(root);
  EXPECT_TRUE(store.verify().ok());
  const StoreTabularSource source(store);
  EXPECT_EQ(source.seeds_per_arch(), 3u);
  for (const auto& a : enumerate_architectures(b.space())) {
    const auto x = source.predictions(a, 2, test_at(5));
    const auto y = b.predictions(a, 2, test_at(5));
    for (std::size_t k = 0; k < x.values().size(); ++k) {
      ASSERT_NEAR(x.values()[k], y.values()[k], 1e-7);
    }
  }
  EXPECT_EQ(best_tabular_architecture(source, 0), best_tabular_architecture(b, 0));
  std::filesystem::remove_all(root);
}

class SyntheticSearchTest : public ::testing::Test {
 protected:
  SyntheticBenchmark bench_{SyntheticBenchmarkConfig{}};
  TabularEvaluator ev_{bench_, {val_at(0), test_at(0)}};
};

TEST_F(SyntheticSearchTest, NesRsEnsembleBeatsBestPoolMember) {
  const auto r = nes_rs(ev_, {200, 10, 50, 10, 0}, 0);
  double best = 1e300;
  for (const auto& l : r.pool.learners()) {
    best = std::min(best, nll(l.at(val_at(0)), ev_.labels(val_at(0))));
  }
  EXPECT_LE(selection_nll(r.selection, r.pool.view(val_at(0)), ev_.labels(val_at(0))),
            best);
}

TEST_F(SyntheticSearchTest, EvolutionConcentratesOnBestFamily) {
  const std::size_t best_family =
      bench_.family_of(best_tabular_architecture(bench_, 0));
  double re_share = 0.0, rs_share = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const SearchBudget b{200, 3, 50, 10, s};
    for (bool evolve : {true, false}) {
      const auto r = evolve ? nes_re(ev_, b, SeverityMix::kClean, 0) : nes_rs(ev_, b, 0);
      double share = 0.0;
      for (const auto& l : r.pool.learners()) share += bench_.family_of(l.arch) == best_family;
      (evolve ? re_share : rs_share) += share / 200.0 / 10.0;
    }
  }
  EXPECT_GE(re_share, rs_share);
  EXPECT_GE(re_share, 1.0 / 5.0);
}

TEST_F(SyntheticSearchTest, NesRsBeatsDeepEnsRsOnTest) {
  int wins = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto rs = nes_rs(ev_, {200, 3, 50, 10, s}, 0);
    const auto de = deep_ens_rs(ev_, 200, 3, 0, s);
    const auto& y = ev_.labels(test_at(0));
    wins += selection_nll(rs.selection, rs.pool.view(test_at(0)), y) <
            selection_nll(de.selection, de.pool.view(test_at(0)), y);
  }
  EXPECT_GE(wins, 8);
}

}  // namespace
}  // namespace nes
