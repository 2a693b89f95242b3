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

#ifndef NES_SEARCH_TABULAR_H_
#define NES_SEARCH_TABULAR_H_

#include <cstddef>
#include <functional>
#include <vector>

#include "nes/search/evaluator.h"

namespace nes {

// A pre-evaluated search space: predictions of every stored (architecture,
// seed) pair can be looked up without training.
class TabularSource {
 public:
  virtual ~TabularSource() = default;

  virtual const SearchSpace& space() const = 0;
  virtual std::size_t seeds_per_arch() const = 0;
  virtual std::vector<SplitKey> split_keys() const = 0;
  virtual const LabelVector& labels(SplitKey key) const = 0;
  virtual bool contains(const Architecture& arch) const = 0;
  // Throws DataError if the entry is missing.
  virtual PredictionMatrix predictions(const Architecture& arch,
                                       std::size_t seed,
                                       SplitKey key) const = 0;
  // Visits every stored architecture in a fixed order.
  virtual void for_each_architecture(
      const std::function<void(const Architecture&)>& visit) const = 0;
};

// Evaluator backed by a table lookup. A job seed s maps to stored seed
// s mod seeds_per_arch(), so consecutive job seeds cover distinct stored
// seeds.
class TabularEvaluator : public Evaluator {
 public:
  // `keys` restricts which splits each lookup returns; empty means all.
  explicit TabularEvaluator(const TabularSource& source,
                            std::vector<SplitKey> keys = {});

  const SearchSpace& space() const override { return source_.space(); }
  TrainedNetwork train(const Architecture& arch,
                       std::uint64_t seed) const override;
  const LabelVector& labels(SplitKey key) const override {
    return source_.labels(key);
  }
  std::vector<SplitKey> split_keys() const override { return keys_; }

 private:
  const TabularSource& source_;
  std::vector<SplitKey> keys_;
};

}  // namespace nes

#endif  // NES_SEARCH_TABULAR_H_
