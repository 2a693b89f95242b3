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

#include "nes/toy/toy_trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nes/error.h"

namespace nes {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (momentum < 0 || momentum >= 1) throw ConfigError("momentum must lie in [0, 1)");
  if (l2 < 0) throw ConfigError("l2 must be nonnegative");
  if (anchored && anchored->lambda < 0) {
    throw ConfigError("anchored lambda must be nonnegative");
  }
}

std::string TrainConfig::describe() const {
  std::ostringstream os;
  os << "epochs=" << epochs << " batch_size=" << batch_size
     << " learning_rate=" << learning_rate << " momentum=" << momentum
     << " l2=" << l2;
  if (anchored) os << " anchored_lambda=" << anchored->lambda;
  return os.str();
}

TrainResult train_network(const SearchSpace& space, const Architecture& arch,
                          const NetShape& shape, const ToyDataset& train,
                          const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  if (train.split != DataSplit::kTrain || train.severity != 0) {
    throw std::invalid_argument("training data must be the clean train split");
  }
  TrainResult result{ToyNetwork(space, arch, shape), {}, {}};
  ToyNetwork& net = result.network;
  Rng init_rng(mix_seed({seed, 1}));
  const auto init = net.sample_initialization(init_rng);
  std::copy(init.begin(), init.end(), net.parameters().begin());

  Regularizer reg;
  reg.num_train = train.size();
  if (config.anchored) {
    Rng anchor_rng(mix_seed({seed, 2}));
    result.anchor = net.sample_initialization(anchor_rng);
    reg.anchor = result.anchor;
    reg.anchor_lambda = config.anchored->lambda;
  } else {
    reg.l2 = config.l2;
  }

  Rng shuffle_rng(mix_seed({seed, 3}));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> velocity(net.num_parameters(), 0.0), grad;
  const std::size_t batch = std::min(config.batch_size, train.size());
  Eigen::MatrixXd x(train.features.rows(), static_cast<Eigen::Index>(batch));
  std::vector<std::uint32_t> y(batch);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start + batch <= order.size(); start += batch) {
      for (std::size_t k = 0; k < batch; ++k) {
        x.col(static_cast<Eigen::Index>(k)) =
            train.features.col(static_cast<Eigen::Index>(order[start + k]));
        y[k] = train.labels[order[start + k]];
      }
      const double value = net.loss(x, y, reg, &grad);
      if (!std::isfinite(value)) {
        throw TrainingError("training diverged at epoch " + std::to_string(epoch) +
                            " (" + config.describe() + ")");
      }
      sum += value;
      ++steps;
      auto theta = net.parameters();
      for (std::size_t p = 0; p < theta.size(); ++p) {
        velocity[p] = config.momentum * velocity[p] - config.learning_rate * grad[p];
        theta[p] += velocity[p];
      }
    }
    result.epoch_losses.push_back(sum / static_cast<double>(steps));
  }
  return result;
}

ToyEvaluator::ToyEvaluator(SearchSpace space, ToyBenchmarkConfig config)
    : space_(std::move(space)),
      config_(std::move(config)),
      task_(make_toy_task(config_.task)) {
  config_.shape().validate();
  config_.train.validate();
  if (config_.severities.empty()) throw ConfigError("severities must not be empty");
  for (int s : config_.severities) {
    if (s < 0 || s > kMaxSeverity) throw ConfigError("severity out of range");
    if (s == 0) continue;
    Rng val_rng(mix_seed({config_.task.task_seed, 40, static_cast<std::uint64_t>(s)}));
    Rng test_rng(mix_seed({config_.task.task_seed, 41, static_cast<std::uint64_t>(s)}));
    shifted_.emplace(val_at(s), corrupt(task_.val, CorruptionFamily::kValidation, s, val_rng));
    shifted_.emplace(test_at(s), corrupt(task_.test, CorruptionFamily::kTest, s, test_rng));
  }
  Rng probe(0);
  ToyNetwork(space_, sample_architecture(space_, probe), config_.shape());
}

std::vector<SplitKey> ToyEvaluator::split_keys() const {
  std::vector<SplitKey> keys;
  for (Split s : {Split::kVal, Split::kTest}) {
    for (int v : config_.severities) keys.push_back({s, v});
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

const ToyDataset& ToyEvaluator::dataset(SplitKey key) const {
  if (key.severity == 0) return key.split == Split::kVal ? task_.val : task_.test;
  auto it = shifted_.find(key);
  if (it == shifted_.end()) {
    throw DataError("toy benchmark has no " + to_string(key) + " split");
  }
  return it->second;
}

TrainedNetwork ToyEvaluator::train(const Architecture& arch,
                                   std::uint64_t seed) const {
  const auto result = train_network(space_, arch, config_.shape(), task_.train,
                                    config_.train, seed);
  TrainedNetwork net{arch, seed, {}};
  for (auto key : split_keys()) {
    net.predictions.emplace(key, result.network.predict(dataset(key).features));
  }
  return net;
}

}  // namespace nes
