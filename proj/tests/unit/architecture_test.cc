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

#include "nes/search/architecture.h"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

namespace nes {
namespace {

std::vector<Edge> flat_edges(const Architecture& a) {
  std::vector<Edge> out;
  for (const auto& node : a.nodes()) out.insert(out.end(), node.begin(), node.end());
  return out;
}

TEST(SearchSpaceTest, TabularCellMatchesNasBench201Count) {
  const auto space = SearchSpace::tabular_cell(4);
  EXPECT_EQ(space.num_edges(), 6u);
  EXPECT_EQ(space.size(), 15625u);
  const auto all = enumerate_architectures(space);
  EXPECT_EQ(all.size(), 15625u);
  EXPECT_EQ(std::set<Architecture>(all.begin(), all.end()).size(), 15625u);
}

TEST(SearchSpaceTest, MlpCellEnumerationMatchesSize) {
  for (std::size_t nodes : {1u, 2u, 3u}) {
    const auto space = SearchSpace::mlp_cell(
        nodes, {"linear_relu", "identity", "linear"});
    const auto all = enumerate_architectures(space);
    EXPECT_EQ(all.size(), space.size()) << nodes;
    for (const auto& a : all) EXPECT_NO_THROW(validate_architecture(space, a));
  }
  EXPECT_EQ(SearchSpace::mlp_cell(2, {"a", "b"}).size(), 48u);
}

TEST(SearchSpaceTest, IdRoundTrip) {
  for (const auto& space :
       {SearchSpace::mlp_cell(), SearchSpace::tabular_cell(4),
        SearchSpace::mlp_cell(3, {"x", "y"})}) {
    EXPECT_EQ(SearchSpace::parse(space.id()), space);
  }
  EXPECT_THROW(SearchSpace::parse("ring-cell:4:a,b"), std::invalid_argument);
  EXPECT_THROW(SearchSpace::parse("mlp-cell:0:a"), std::invalid_argument);
}

TEST(ArchitectureTest, GenomeStringRoundTrip) {
  Rng rng(3);
  for (const auto& space : {SearchSpace::mlp_cell(), SearchSpace::tabular_cell(4)}) {
    for (int t = 0; t < 200; ++t) {
      const auto a = sample_architecture(space, rng);
      EXPECT_EQ(Architecture::parse(space, a.to_string(space)), a);
    }
  }
  const auto space = SearchSpace::tabular_cell(3);
  EXPECT_EQ(Architecture::parse(space, "|identity~0|+|linear~0|scale_half~1|")
                .to_string(space),
            "|identity~0|+|linear~0|scale_half~1|");
}

TEST(ArchitectureTest, RejectsMalformedGenomes) {
  const auto tab = SearchSpace::tabular_cell(3);
  EXPECT_THROW(Architecture::parse(tab, "|identity~0|"), std::invalid_argument);
  EXPECT_THROW(Architecture::parse(tab, "|conv~0|+|linear~0|linear~1|"),
               std::invalid_argument);
  EXPECT_THROW(Architecture::parse(tab, "|identity~0|+|linear~0|linear~2|"),
               std::invalid_argument);
  const auto mlp = SearchSpace::mlp_cell(1);
  // Both edges from the same source.
  EXPECT_THROW(validate_architecture(mlp, Architecture({{{0, 0}, {0, 1}}})),
               std::invalid_argument);
  EXPECT_NO_THROW(validate_architecture(mlp, Architecture({{{0, 0}, {1, 1}}})));
}

TEST(ArchitectureTest, SamplingIsUniform) {
  const auto space = SearchSpace::mlp_cell(2, {"a", "b"});
  const auto all = enumerate_architectures(space);
  ASSERT_EQ(all.size(), 48u);
  std::map<Architecture, int> counts;
  Rng rng(11);
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) ++counts[sample_architecture(space, rng)];
  ASSERT_EQ(counts.size(), 48u);
  const double expected = draws / 48.0;
  double chi2 = 0.0;
  for (const auto& [a, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 47 degrees of freedom, p = 0.001 critical value.
  EXPECT_LT(chi2, 82.72);
}

TEST(ArchitectureTest, SingletonSpaceHasOneGenome) {
  const auto space = SearchSpace::mlp_cell(1, {"linear"});
  ASSERT_EQ(space.size(), 1u);
  Rng rng(0);
  EXPECT_EQ(sample_architecture(space, rng).to_string(space), "|linear~0|linear~1|");
}

TEST(MutationTest, IdentityKeepsGenome) {
  const auto space = SearchSpace::mlp_cell();
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto a = sample_architecture(space, rng);
    auto b = a;
    EXPECT_TRUE(apply_mutation(space, b, MutationKind::kIdentity, rng));
    EXPECT_EQ(a, b);
  }
}

TEST(MutationTest, OpMutationChangesExactlyOneOperation) {
  for (const auto& space : {SearchSpace::mlp_cell(), SearchSpace::tabular_cell(4)}) {
    Rng rng(5);
    for (int t = 0; t < 1000; ++t) {
      const auto a = sample_architecture(space, rng);
      auto b = a;
      ASSERT_TRUE(apply_mutation(space, b, MutationKind::kOp, rng));
      ASSERT_NO_THROW(validate_architecture(space, b));
      const auto ea = flat_edges(a), eb = flat_edges(b);
      ASSERT_EQ(ea.size(), eb.size());
      int op_changes = 0;
      for (std::size_t k = 0; k < ea.size(); ++k) {
        EXPECT_EQ(ea[k].source, eb[k].source);
        op_changes += ea[k].op != eb[k].op;
      }
      EXPECT_EQ(op_changes, 1);
    }
  }
}

TEST(MutationTest, HiddenStateMutationRewiresExactlyOneEdge) {
  const auto space = SearchSpace::mlp_cell();
  Rng rng(9);
  for (int t = 0; t < 1000; ++t) {
    const auto a = sample_architecture(space, rng);
    auto b = a;
    ASSERT_TRUE(apply_mutation(space, b, MutationKind::kHiddenState, rng));
    ASSERT_NO_THROW(validate_architecture(space, b));
    std::multiset<std::uint32_t> ops_a, ops_b;
    int changed_nodes = 0;
    for (std::size_t j = 0; j < a.nodes().size(); ++j) {
      const auto& na = a.nodes()[j];
      const auto& nb = b.nodes()[j];
      for (const auto& e : na) ops_a.insert(e.op);
      for (const auto& e : nb) ops_b.insert(e.op);
      if (na == nb) continue;
      ++changed_nodes;
      // One edge kept, the other differs only in its source.
      std::vector<Edge> only_a, only_b;
      std::set_difference(na.begin(), na.end(), nb.begin(), nb.end(),
                          std::back_inserter(only_a));
      std::set_difference(nb.begin(), nb.end(), na.begin(), na.end(),
                          std::back_inserter(only_b));
      ASSERT_EQ(only_a.size(), 1u);
      ASSERT_EQ(only_b.size(), 1u);
      EXPECT_EQ(only_a[0].op, only_b[0].op);
      EXPECT_NE(only_a[0].source, only_b[0].source);
    }
    EXPECT_EQ(changed_nodes, 1);
    EXPECT_EQ(ops_a, ops_b);
  }
}

TEST(MutationTest, TabularCellHasNoHiddenStateMutation) {
  const auto space = SearchSpace::tabular_cell(4);
  Rng rng(2);
  auto a = sample_architecture(space, rng);
  const auto before = a;
  EXPECT_FALSE(apply_mutation(space, a, MutationKind::kHiddenState, rng));
  EXPECT_EQ(a, before);
  for (int t = 0; t < 200; ++t) {
    MutationKind kind;
    const auto child = mutate(space, a, rng, &kind);
    EXPECT_EQ(kind, MutationKind::kOp);
    EXPECT_NE(child, a);
  }
}

TEST(MutationTest, MutateAlwaysStaysInSpaceAndUsesEveryKind) {
  const auto space = SearchSpace::mlp_cell();
  Rng rng(4);
  std::map<MutationKind, int> kinds;
  auto a = sample_architecture(space, rng);
  for (int t = 0; t < 3000; ++t) {
    MutationKind kind;
    a = mutate(space, a, rng, &kind);
    ++kinds[kind];
    ASSERT_NO_THROW(validate_architecture(space, a));
  }
  for (auto k : {MutationKind::kIdentity, MutationKind::kOp,
                 MutationKind::kHiddenState}) {
    EXPECT_GT(kinds[k], 800) << static_cast<int>(k);
  }
}

TEST(MutationTest, SingleOpSpaceFallsBack) {
  const auto space = SearchSpace::tabular_cell(3, {"identity"});
  Rng rng(0);
  const auto a = sample_architecture(space, rng);
  MutationKind kind;
  EXPECT_EQ(mutate(space, a, rng, &kind), a);
  EXPECT_EQ(kind, MutationKind::kIdentity);
}

TEST(SeedTest, MixSeedIsOrderSensitiveAndStable) {
  EXPECT_EQ(mix_seed({1, 2, 3}), mix_seed({1, 2, 3}));
  EXPECT_NE(mix_seed({1, 2, 3}), mix_seed({3, 2, 1}));
  EXPECT_NE(mix_seed({0}), mix_seed({0, 0}));
}

}  // namespace
}  // namespace nes
