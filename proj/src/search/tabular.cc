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

#include "nes/search/tabular.h"

#include <algorithm>

#include "nes/error.h"

namespace nes {

TabularEvaluator::TabularEvaluator(const TabularSource& source,
                                   std::vector<SplitKey> keys)
    : source_(source), keys_(std::move(keys)) {
  const auto available = source_.split_keys();
  if (keys_.empty()) {
    keys_ = available;
    return;
  }
  for (SplitKey key : keys_) {
    if (std::find(available.begin(), available.end(), key) ==
        available.end()) {
      throw DataError("tabular source has no split " + to_string(key));
    }
  }
}

TrainedNetwork TabularEvaluator::train(const Architecture& arch,
                                       std::uint64_t seed) const {
  if (!source_.contains(arch)) {
    throw DataError("architecture not in table: " +
                    arch.to_string(source_.space()));
  }
  TrainedNetwork out;
  out.arch = arch;
  out.seed = seed;
  const std::size_t stored = seed % source_.seeds_per_arch();
  for (SplitKey key : keys_) {
    out.predictions.emplace(key, source_.predictions(arch, stored, key));
  }
  return out;
}

}  // namespace nes
