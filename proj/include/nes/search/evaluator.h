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

#ifndef NES_SEARCH_EVALUATOR_H_
#define NES_SEARCH_EVALUATOR_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nes/core/prediction_matrix.h"
#include "nes/search/architecture.h"
#include "nes/selection/ensemble_selection.h"

namespace nes {

enum class Split { kVal, kTest };

inline constexpr int kMaxSeverity = 5;

// An evaluation split at a shift severity (0 = clean).
struct SplitKey {
  Split split = Split::kVal;
  int severity = 0;
  friend auto operator<=>(const SplitKey&, const SplitKey&) = default;
};

inline SplitKey val_at(int severity) { return {Split::kVal, severity}; }
inline SplitKey test_at(int severity) { return {Split::kTest, severity}; }

// "val@0", "test@5".
std::string to_string(SplitKey key);
SplitKey parse_split_key(std::string_view text);

using PredictionsBySplit = std::map<SplitKey, PredictionMatrix>;

// Output of one training job.
struct TrainedNetwork {
  Architecture arch;
  std::uint64_t seed = 0;
  PredictionsBySplit predictions;
};

// Turns (architecture, seed) into a trained network's predictions. train()
// may be called concurrently from several worker threads.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  virtual const SearchSpace& space() const = 0;
  virtual TrainedNetwork train(const Architecture& arch,
                               std::uint64_t seed) const = 0;
  virtual const LabelVector& labels(SplitKey key) const = 0;
  // Keys present in every TrainedNetwork this evaluator returns.
  virtual std::vector<SplitKey> split_keys() const = 0;
};

struct BaseLearner {
  LearnerId id;
  Architecture arch;
  std::uint64_t seed = 0;
  PredictionsBySplit predictions;

  const PredictionMatrix& at(SplitKey key) const;
};

// Every network trained during a search, in training order. Ids are
// positions.
class Pool {
 public:
  LearnerId add(TrainedNetwork network);

  std::size_t size() const { return learners_.size(); }
  bool empty() const { return learners_.empty(); }
  const BaseLearner& operator[](LearnerId id) const {
    return learners_.at(id.value);
  }
  const std::vector<BaseLearner>& learners() const { return learners_; }

  PoolPredictions view(SplitKey key) const;
  PoolPredictions view(SplitKey key, std::span<const LearnerId> subset) const;

 private:
  std::vector<BaseLearner> learners_;
};

}  // namespace nes

#endif  // NES_SEARCH_EVALUATOR_H_
