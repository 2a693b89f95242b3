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

#include "nes/search/evaluator.h"

#include <stdexcept>

namespace nes {

std::string to_string(SplitKey key) {
  return std::string(key.split == Split::kVal ? "val" : "test") + "@" +
         std::to_string(key.severity);
}

SplitKey parse_split_key(std::string_view text) {
  const auto at = text.find('@');
  if (at == std::string_view::npos) {
    throw std::invalid_argument("split key '" + std::string(text) +
                                "' lacks '@severity'");
  }
  SplitKey key;
  const auto name = text.substr(0, at);
  if (name == "val") {
    key.split = Split::kVal;
  } else if (name == "test") {
    key.split = Split::kTest;
  } else {
    throw std::invalid_argument("unknown split '" + std::string(name) + "'");
  }
  const std::string sev(text.substr(at + 1));
  if (sev.size() != 1 || sev[0] < '0' || sev[0] > '0' + kMaxSeverity) {
    throw std::invalid_argument("severity must be 0.." +
                                std::to_string(kMaxSeverity));
  }
  key.severity = sev[0] - '0';
  return key;
}

const PredictionMatrix& BaseLearner::at(SplitKey key) const {
  auto it = predictions.find(key);
  if (it == predictions.end()) {
    throw std::out_of_range("learner " + std::to_string(id.value) +
                            " has no predictions for " + to_string(key));
  }
  return it->second;
}

LearnerId Pool::add(TrainedNetwork network) {
  const LearnerId id{static_cast<std::uint32_t>(learners_.size())};
  learners_.push_back(BaseLearner{id, std::move(network.arch), network.seed,
                                  std::move(network.predictions)});
  return id;
}

PoolPredictions Pool::view(SplitKey key) const {
  PoolPredictions out;
  for (const auto& learner : learners_) out.emplace(learner.id, learner.at(key));
  return out;
}

PoolPredictions Pool::view(SplitKey key,
                           std::span<const LearnerId> subset) const {
  PoolPredictions out;
  for (LearnerId id : subset) out.emplace(id, (*this)[id].at(key));
  return out;
}

}  // namespace nes
