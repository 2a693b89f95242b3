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

#ifndef NES_TOY_TOY_TASK_H_
#define NES_TOY_TOY_TASK_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nes/core/prediction_matrix.h"
#include "nes/search/architecture.h"

namespace nes {

enum class DataSplit { kTrain, kVal, kTest };
enum class CorruptionFamily { kNone, kValidation, kTest };

struct ToyDataset {
  Eigen::MatrixXd features;  // D x N, one column per point
  LabelVector labels;
  DataSplit split = DataSplit::kTrain;
  int severity = 0;
  CorruptionFamily family = CorruptionFamily::kNone;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.rows()); }
};

// Gaussian mixture: every class owns `clusters_per_class` centers drawn from
// N(0, separation^2 I); points add N(0, overlap^2 I) noise around a uniformly
// chosen center of a uniformly chosen class.
struct ToyTaskConfig {
  std::uint64_t task_seed = 0;
  std::size_t num_train = 2048;
  std::size_t num_val = 512;
  std::size_t num_test = 2048;
  std::size_t num_classes = 10;
  std::size_t input_dim = 16;
  std::size_t clusters_per_class = 2;
  double separation = 1.0;
  double overlap = 1.2;

  // Throws ConfigError.
  void validate() const;
};

struct ToyTask {
  ToyDataset train;
  ToyDataset val;
  ToyDataset test;
};

ToyTask make_toy_task(const ToyTaskConfig& config);

// Operator names of each corruption family; the two sets are disjoint.
const std::vector<std::string>& corruption_operators(CorruptionFamily family);

// Applies one operator per point, drawn uniformly from `family`, with
// magnitude growing linearly in `severity` (1..5). The random draws do not
// depend on the severity, so equal rng states give nested corruptions.
// Throws std::invalid_argument if `dataset` is already corrupted.
ToyDataset corrupt(const ToyDataset& dataset, CorruptionFamily family,
                   int severity, Rng& rng);

}  // namespace nes

#endif  // NES_TOY_TOY_TASK_H_
