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

#ifndef NES_TOY_TOY_TRAINER_H_
#define NES_TOY_TOY_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "nes/search/evaluator.h"
#include "nes/toy/toy_network.h"
#include "nes/toy/toy_task.h"

namespace nes {

struct AnchoredConfig {
  double lambda = 0.4;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double l2 = 5e-4;  // ignored in anchored mode
  std::optional<AnchoredConfig> anchored;

  // Throws ConfigError.
  void validate() const;
  std::string describe() const;
};

struct TrainResult {
  ToyNetwork network;
  // Empty unless anchored.
  std::vector<double> anchor;
  // Mean minibatch objective per epoch.
  std::vector<double> epoch_losses;
};

// Minibatch SGD with momentum from a N(0, 1/fan_in) initialization. In
// anchored mode the anchor is an independent draw from the same
// distribution and weight decay is off. Throws TrainingError if the loss
// becomes non-finite.
TrainResult train_network(const SearchSpace& space, const Architecture& arch,
                          const NetShape& shape, const ToyDataset& train,
                          const TrainConfig& config, std::uint64_t seed);

struct ToyBenchmarkConfig {
  ToyTaskConfig task;
  std::size_t hidden_width = 16;
  std::size_t macro_depth = 2;
  TrainConfig train;
  std::vector<int> severities = {0, 5};

  NetShape shape() const {
    return {task.input_dim, task.num_classes, hidden_width, macro_depth};
  }
};

// Trains toy networks and reports predictions on clean and corrupted
// validation/test sets. Corrupted sets are built once per severity.
class ToyEvaluator : public Evaluator {
 public:
  ToyEvaluator(SearchSpace space, ToyBenchmarkConfig config);

  const SearchSpace& space() const override { return space_; }
  TrainedNetwork train(const Architecture& arch,
                       std::uint64_t seed) const override;
  const LabelVector& labels(SplitKey key) const override {
    return dataset(key).labels;
  }
  std::vector<SplitKey> split_keys() const override;

  const ToyBenchmarkConfig& config() const { return config_; }
  const ToyTask& task() const { return task_; }
  const ToyDataset& dataset(SplitKey key) const;

 private:
  SearchSpace space_;
  ToyBenchmarkConfig config_;
  ToyTask task_;
  std::map<SplitKey, ToyDataset> shifted_;
};

}  // namespace nes

#endif  // NES_TOY_TOY_TRAINER_H_
