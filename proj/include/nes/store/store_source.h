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

#ifndef NES_STORE_STORE_SOURCE_H_
#define NES_STORE_STORE_SOURCE_H_

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "nes/search/evaluator.h"
#include "nes/search/tabular.h"
#include "nes/store/prediction_store.h"

namespace nes {

// Tabular view of a store. Stored seeds of each architecture are sorted and
// addressed by position, so seeds_per_arch() is the smallest per-architecture
// seed count.
class StoreTabularSource : public TabularSource {
 public:
  explicit StoreTabularSource(const PredictionStore& store);

  const SearchSpace& space() const override { return space_; }
  std::size_t seeds_per_arch() const override { return seeds_per_arch_; }
  std::vector<SplitKey> split_keys() const override;
  const LabelVector& labels(SplitKey key) const override {
    return store_.labels(key);
  }
  bool contains(const Architecture& arch) const override;
  PredictionMatrix predictions(const Architecture& arch, std::size_t seed,
                               SplitKey key) const override;
  void for_each_architecture(
      const std::function<void(const Architecture&)>& visit) const override;

 private:
  const PredictionStore& store_;
  SearchSpace space_;
  std::map<Architecture, std::vector<std::uint64_t>> seeds_;
  std::size_t seeds_per_arch_ = 0;
};

// Records every network the inner evaluator trains and replays stored
// results instead of retraining, which lets an interrupted search resume.
class PersistentEvaluator : public Evaluator {
 public:
  PersistentEvaluator(const Evaluator& inner, PredictionStore& store);

  const SearchSpace& space() const override { return inner_.space(); }
  TrainedNetwork train(const Architecture& arch,
                       std::uint64_t seed) const override;
  const LabelVector& labels(SplitKey key) const override {
    return inner_.labels(key);
  }
  std::vector<SplitKey> split_keys() const override {
    return inner_.split_keys();
  }

  std::size_t replayed() const { return replayed_.load(); }
  std::size_t trained() const { return trained_.load(); }

 private:
  const Evaluator& inner_;
  PredictionStore& store_;
  mutable std::mutex mu_;
  mutable std::atomic<std::size_t> replayed_{0};
  mutable std::atomic<std::size_t> trained_{0};
};

}  // namespace nes

#endif  // NES_STORE_STORE_SOURCE_H_
