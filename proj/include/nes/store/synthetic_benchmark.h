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

#ifndef NES_STORE_SYNTHETIC_BENCHMARK_H_
#define NES_STORE_SYNTHETIC_BENCHMARK_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nes/search/tabular.h"
#include "nes/store/prediction_store.h"

namespace nes {

// Procedural tabular benchmark with planted architecture families.
//
// The space is a tabular cell; the operation on the first edge (mod G) picks
// an architecture's family. Logits of architecture a, seed k, on point i:
//
//   z = beta_a * onehot(y_i) + tau * U_g + sigma_w * A_a + sigma_s * S_ak
//
// U_g is noise shared by the whole family, A_a sums per-(edge, op) noise
// fields over the remaining edges, and S_ak is private to the network.
// beta_a adds a family quality offset and one quality term per (edge, op),
// so single-edge mutations move quality locally. Severity v > 0 shrinks the
// true-class margin and adds corruption noise, both scaled by
// (v / 5) * (1 - robustness_a); robustness falls as family quality rises.
// Validation corruption is Gaussian, test corruption is Laplace, drawn
// independently.
struct SyntheticBenchmarkConfig {
  std::uint64_t gen_seed = 0;
  std::size_t num_families = 5;
  std::size_t cell_nodes = 4;
  std::size_t num_ops = 5;
  std::size_t seeds_per_arch = 3;
  std::size_t num_points = 500;
  std::size_t num_classes = 10;
  double separation = 2.0;  // tau
  double sigma_w = 1.0;
  double sigma_s = 0.3;
  double signal = 4.0;
  double family_quality = 0.5;
  double edge_quality = 0.25;
  double shift_margin = 0.6;
  double shift_noise = 2.0;
  std::vector<int> severities = {0, 1, 2, 3, 4, 5};

  // Throws ConfigError.
  void validate() const;
  SearchSpace space() const;
};

class SyntheticBenchmark : public TabularSource {
 public:
  explicit SyntheticBenchmark(SyntheticBenchmarkConfig config);

  const SyntheticBenchmarkConfig& config() const { return config_; }
  std::size_t family_of(const Architecture& arch) const;
  double robustness_of(const Architecture& arch) const;

  const SearchSpace& space() const override { return space_; }
  std::size_t seeds_per_arch() const override {
    return config_.seeds_per_arch;
  }
  std::vector<SplitKey> split_keys() const override;
  const LabelVector& labels(SplitKey key) const override;
  bool contains(const Architecture& arch) const override;
  PredictionMatrix predictions(const Architecture& arch, std::size_t seed,
                               SplitKey key) const override;
  void for_each_architecture(
      const std::function<void(const Architecture&)>& visit) const override;

 private:
  struct SplitFields {
    LabelVector labels;
    std::vector<std::vector<double>> family_noise;   // [g][i*C+c]
    std::vector<std::vector<double>> edge_noise;     // [(e-1)*O+o][i*C+c]
    std::vector<std::vector<double>> family_shift;   // [g][i*C+c]
  };
  const SplitFields& fields(Split split) const {
    return split == Split::kVal ? val_ : test_;
  }
  SplitFields make_fields(Split split) const;
  double quality_of(const Architecture& arch) const;

  SyntheticBenchmarkConfig config_;
  SearchSpace space_;
  std::vector<double> family_quality_;
  std::vector<double> family_robustness_;
  std::vector<double> edge_quality_;     // [(e-1)*O+o]
  std::vector<double> edge_robustness_;  // [(e-1)*O+o]
  SplitFields val_;
  SplitFields test_;
};

// Writes every architecture of `source` for the given seeds and split keys
// into `store` (empty arguments mean all). Returns the resulting manifest.
StoreManifest materialize(const TabularSource& source, PredictionStore& store,
                          std::vector<SplitKey> keys = {},
                          std::size_t seeds = 0);

}  // namespace nes

#endif  // NES_STORE_SYNTHETIC_BENCHMARK_H_
