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

#ifndef NES_TESTS_SUPPORT_FAKE_EVALUATOR_H_
#define NES_TESTS_SUPPORT_FAKE_EVALUATOR_H_

#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nes/search/evaluator.h"

namespace nes::testing {

// Predictions are a pure function of (genome, seed): a genome-dependent
// true-class margin plus genome noise plus seed noise.
class FakeEvaluator : public Evaluator {
 public:
  explicit FakeEvaluator(SearchSpace space, std::size_t n = 40,
                         std::size_t c = 4,
                         std::vector<SplitKey> keys = {val_at(0), val_at(5),
                                                       test_at(0), test_at(5)})
      : space_(std::move(space)), n_(n), c_(c), keys_(std::move(keys)) {
    for (auto key : keys_) {
      std::mt19937_64 rng(17 + static_cast<int>(key.split) * 7 + key.severity);
      std::vector<std::uint32_t> y(n_);
      for (auto& v : y) v = static_cast<std::uint32_t>(rng() % c_);
      labels_.emplace(key, LabelVector(std::move(y)));
    }
  }

  const SearchSpace& space() const override { return space_; }
  const LabelVector& labels(SplitKey key) const override {
    return labels_.at(key);
  }
  std::vector<SplitKey> split_keys() const override { return keys_; }

  TrainedNetwork train(const Architecture& arch,
                       std::uint64_t seed) const override {
    ++calls_;
    const std::string genome = arch.to_string(space_);
    if (fail_on && fail_on(genome, seed)) {
      throw std::runtime_error("injected failure");
    }
    const std::uint64_t h = std::hash<std::string>{}(genome);
    TrainedNetwork net{arch, seed, {}};
    for (auto key : keys_) {
      std::mt19937_64 arch_rng(h ^ (static_cast<std::uint64_t>(key.severity) << 40) ^
                               (static_cast<std::uint64_t>(key.split) << 50));
      std::mt19937_64 seed_rng(h * 31 + seed * 1000003 + key.severity * 7 +
                               static_cast<std::uint64_t>(key.split));
      std::normal_distribution<double> normal;
      const double margin = 1.0 + 2.0 * std::uniform_real_distribution<>()(arch_rng);
      const auto& y = labels_.at(key);
      std::vector<double> z(n_ * c_);
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = 0; k < c_; ++k) {
          z[i * c_ + k] = 1.2 * normal(arch_rng) + 0.4 * normal(seed_rng) +
                          (k == y[i] ? margin : 0.0);
        }
      }
      net.predictions.emplace(key, PredictionMatrix::from_logits(n_, c_, z));
    }
    return net;
  }

  std::size_t calls() const { return calls_.load(); }
  std::function<bool(const std::string&, std::uint64_t)> fail_on;

 private:
  SearchSpace space_;
  std::size_t n_;
  std::size_t c_;
  std::vector<SplitKey> keys_;
  std::map<SplitKey, LabelVector> labels_;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace nes::testing

#endif  // NES_TESTS_SUPPORT_FAKE_EVALUATOR_H_
