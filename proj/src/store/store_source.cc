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

#include "nes/store/store_source.h"

#include <algorithm>
#include <set>

#include "nes/error.h"
#include "nes/store/matrix_file.h"

namespace nes {

StoreTabularSource::StoreTabularSource(const PredictionStore& store)
    : store_(store), space_(SearchSpace::parse(store.space_id())) {
  std::map<Architecture, std::set<std::uint64_t>> seeds;
  for (const auto& e : store.manifest().entries) {
    seeds[Architecture::parse(space_, e.key.arch)].insert(e.key.seed);
  }
  if (seeds.empty()) throw DataError("store holds no predictions");
  seeds_per_arch_ = SIZE_MAX;
  for (auto& [arch, s] : seeds) {
    seeds_per_arch_ = std::min(seeds_per_arch_, s.size());
    seeds_.emplace(arch, std::vector<std::uint64_t>(s.begin(), s.end()));
  }
}

std::vector<SplitKey> StoreTabularSource::split_keys() const {
  std::vector<SplitKey> keys;
  for (const auto& [key, y] : store_.manifest().labels) keys.push_back(key);
  return keys;
}

bool StoreTabularSource::contains(const Architecture& arch) const {
  return seeds_.contains(arch);
}

PredictionMatrix StoreTabularSource::predictions(const Architecture& arch,
                                                 std::size_t seed,
                                                 SplitKey key) const {
  auto it = seeds_.find(arch);
  if (it == seeds_.end()) {
    throw DataError("architecture " + arch.to_string(space_) +
                    " is not in the store");
  }
  if (seed >= it->second.size()) {
    throw DataError("architecture " + arch.to_string(space_) + " has only " +
                    std::to_string(it->second.size()) + " seeds");
  }
  return store_.get({arch.to_string(space_), it->second[seed], key});
}

void StoreTabularSource::for_each_architecture(
    const std::function<void(const Architecture&)>& visit) const {
  for (const auto& [arch, s] : seeds_) visit(arch);
}

PersistentEvaluator::PersistentEvaluator(const Evaluator& inner,
                                         PredictionStore& store)
    : inner_(inner), store_(store) {
  if (store.space_id() != inner.space().id()) {
    throw DataError("store space " + store.space_id() +
                    " does not match evaluator space " + inner.space().id());
  }
  for (auto key : inner.split_keys()) store_.set_labels(key, inner.labels(key));
}

TrainedNetwork PersistentEvaluator::train(const Architecture& arch,
                                          std::uint64_t seed) const {
  const auto genome = arch.to_string(inner_.space());
  const auto keys = inner_.split_keys();
  {
    std::lock_guard lock(mu_);
    const bool stored = std::all_of(keys.begin(), keys.end(), [&](SplitKey k) {
      return store_.contains({genome, seed, k});
    });
    if (stored) {
      TrainedNetwork net{arch, seed, {}};
      for (auto k : keys) net.predictions.emplace(k, store_.get({genome, seed, k}));
      ++replayed_;
      return net;
    }
  }
  TrainedNetwork net = inner_.train(arch, seed);
  for (auto& [k, m] : net.predictions) m = decode_matrix(encode_matrix(m));
  std::vector<std::pair<StoreKey, PredictionMatrix>> items;
  {
    std::lock_guard lock(mu_);
    for (const auto& [k, m] : net.predictions) {
      if (!store_.contains({genome, seed, k})) items.push_back({{genome, seed, k}, m});
    }
    store_.put_batch(items);
  }
  ++trained_;
  return net;
}

}  // namespace nes
