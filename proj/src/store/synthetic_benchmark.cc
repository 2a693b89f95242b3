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

#include "nes/store/synthetic_benchmark.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nes/error.h"

namespace nes {
namespace {

enum Stream : std::uint64_t {
  kQualityStream = 11,
  kLabelStream = 21,
  kFamilyNoiseStream,
  kEdgeNoiseStream,
  kFamilyShiftStream,
  kSeedNoiseStream,
  kArchShiftStream,
};

std::vector<double> gaussian_field(std::uint64_t seed, std::size_t size) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> out(size);
  for (auto& v : out) v = normal(rng);
  return out;
}

// Unit-variance Laplace.
std::vector<double> laplace_field(std::uint64_t seed, std::size_t size) {
  Rng rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> out(size);
  for (auto& v : out) v = (expo(rng) - expo(rng)) / std::sqrt(2.0);
  return out;
}

std::uint64_t genome_hash(const Architecture& arch) {
  std::uint64_t h = 0x6e6573;
  for (const auto& node : arch.nodes()) {
    for (const auto& e : node) h = mix_seed({h, e.source, e.op});
  }
  return h;
}

std::vector<std::uint32_t> flat_ops(const Architecture& arch) {
  std::vector<std::uint32_t> ops;
  for (const auto& node : arch.nodes()) {
    for (const auto& e : node) ops.push_back(e.op);
  }
  return ops;
}

}  // namespace

void SyntheticBenchmarkConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw ConfigError("synthetic benchmark: " + what);
  };
  if (cell_nodes < 2) fail("cell_nodes must be at least 2");
  if (num_ops < 1) fail("num_ops must be positive");
  if (num_families < 1 || num_families > num_ops) {
    fail("num_families must lie in [1, num_ops]");
  }
  if (seeds_per_arch < 1) fail("seeds_per_arch must be positive");
  if (num_points < 1) fail("num_points must be positive");
  if (num_classes < 2) fail("num_classes must be at least 2");
  if (!(sigma_s >= 0.0 && sigma_s < sigma_w && sigma_w < separation)) {
    fail("require 0 <= sigma_s < sigma_w < separation");
  }
  if (family_quality < 0 || edge_quality < 0 || shift_margin < 0 ||
      shift_margin > 1 || shift_noise < 0) {
    fail("quality and shift scales must be nonnegative, shift_margin <= 1");
  }
  if (severities.empty()) fail("severities must not be empty");
  for (int s : severities) {
    if (s < 0 || s > kMaxSeverity) fail("severity out of range");
  }
}

SearchSpace SyntheticBenchmarkConfig::space() const {
  std::vector<std::string> ops;
  if (num_ops <= default_op_names().size()) {
    ops.assign(default_op_names().begin(),
               default_op_names().begin() + static_cast<long>(num_ops));
  } else {
    for (std::size_t o = 0; o < num_ops; ++o) ops.push_back("op" + std::to_string(o));
  }
  return SearchSpace::tabular_cell(cell_nodes, std::move(ops));
}

SyntheticBenchmark::SyntheticBenchmark(SyntheticBenchmarkConfig config)
    : config_((config.validate(), std::move(config))), space_(config_.space()) {
  const std::size_t g_count = config_.num_families;
  const std::size_t slots = (space_.num_edges() - 1) * space_.num_ops();

  Rng rng(mix_seed({config_.gen_seed, kQualityStream}));
  std::normal_distribution<double> normal;
  for (std::size_t g = 0; g < g_count; ++g) {
    family_quality_.push_back(config_.family_quality * normal(rng));
  }
  for (std::size_t s = 0; s < slots; ++s) {
    edge_quality_.push_back(config_.edge_quality * normal(rng));
    edge_robustness_.push_back(0.05 * normal(rng));
  }
  // Rank families by quality: the best gets robustness 0.1, the worst 0.9.
  std::vector<std::size_t> order(g_count);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return family_quality_[a] > family_quality_[b];
  });
  family_robustness_.assign(g_count, 0.5);
  if (g_count > 1) {
    for (std::size_t r = 0; r < g_count; ++r) {
      family_robustness_[order[r]] =
          0.1 + 0.8 * static_cast<double>(r) / static_cast<double>(g_count - 1);
    }
  }
  val_ = make_fields(Split::kVal);
  test_ = make_fields(Split::kTest);
}

SyntheticBenchmark::SplitFields SyntheticBenchmark::make_fields(
    Split split) const {
  const std::uint64_t gs = config_.gen_seed;
  const std::uint64_t sp = split == Split::kVal ? 0 : 1;
  const std::size_t n = config_.num_points;
  const std::size_t nc = n * config_.num_classes;
  SplitFields f;
  Rng rng(mix_seed({gs, kLabelStream, sp}));
  std::uniform_int_distribution<std::uint32_t> cls(
      0, static_cast<std::uint32_t>(config_.num_classes - 1));
  std::vector<std::uint32_t> y(n);
  for (auto& v : y) v = cls(rng);
  f.labels = LabelVector(std::move(y));
  for (std::size_t g = 0; g < config_.num_families; ++g) {
    f.family_noise.push_back(gaussian_field(mix_seed({gs, kFamilyNoiseStream, sp, g}), nc));
    const auto shift_seed = mix_seed({gs, kFamilyShiftStream, sp, g});
    f.family_shift.push_back(split == Split::kVal ? gaussian_field(shift_seed, nc)
                                                  : laplace_field(shift_seed, nc));
  }
  const std::size_t slots = (space_.num_edges() - 1) * space_.num_ops();
  for (std::size_t s = 0; s < slots; ++s) {
    f.edge_noise.push_back(gaussian_field(mix_seed({gs, kEdgeNoiseStream, sp, s}), nc));
  }
  return f;
}

std::size_t SyntheticBenchmark::family_of(const Architecture& arch) const {
  return arch.nodes().front().front().op % config_.num_families;
}

double SyntheticBenchmark::quality_of(const Architecture& arch) const {
  const auto ops = flat_ops(arch);
  double q = config_.signal + family_quality_[family_of(arch)];
  for (std::size_t e = 1; e < ops.size(); ++e) {
    q += edge_quality_[(e - 1) * space_.num_ops() + ops[e]];
  }
  return q;
}

double SyntheticBenchmark::robustness_of(const Architecture& arch) const {
  const auto ops = flat_ops(arch);
  double r = family_robustness_[family_of(arch)];
  for (std::size_t e = 1; e < ops.size(); ++e) {
    r += edge_robustness_[(e - 1) * space_.num_ops() + ops[e]];
  }
  return std::clamp(r, 0.0, 0.95);
}

std::vector<SplitKey> SyntheticBenchmark::split_keys() const {
  std::vector<SplitKey> keys;
  for (Split s : {Split::kVal, Split::kTest}) {
    for (int v : config_.severities) keys.push_back({s, v});
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

const LabelVector& SyntheticBenchmark::labels(SplitKey key) const {
  return fields(key.split).labels;
}

bool SyntheticBenchmark::contains(const Architecture& arch) const {
  try {
    validate_architecture(space_, arch);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

PredictionMatrix SyntheticBenchmark::predictions(const Architecture& arch,
                                                 std::size_t seed,
                                                 SplitKey key) const {
  if (!contains(arch)) {
    throw DataError("architecture is not in the synthetic space");
  }
  if (seed >= config_.seeds_per_arch) {
    throw DataError("seed " + std::to_string(seed) + " exceeds seeds_per_arch");
  }
  if (key.severity < 0 || key.severity > kMaxSeverity) {
    throw DataError("severity out of range: " + to_string(key));
  }
  const auto& f = fields(key.split);
  const std::size_t n = config_.num_points;
  const std::size_t c = config_.num_classes;
  const std::uint64_t sp = key.split == Split::kVal ? 0 : 1;
  const std::uint64_t h = genome_hash(arch);
  const auto ops = flat_ops(arch);
  const std::size_t g = family_of(arch);

  std::vector<double> z(n * c, 0.0);
  const double arch_scale =
      ops.size() > 1 ? config_.sigma_w / std::sqrt(double(ops.size() - 1)) : 0.0;
  for (std::size_t e = 1; e < ops.size(); ++e) {
    const auto& field = f.edge_noise[(e - 1) * space_.num_ops() + ops[e]];
    for (std::size_t k = 0; k < z.size(); ++k) z[k] += arch_scale * field[k];
  }
  const auto& family = f.family_noise[g];
  for (std::size_t k = 0; k < z.size(); ++k) {
    z[k] += config_.separation * family[k];
  }
  if (config_.sigma_s > 0) {
    const auto own = gaussian_field(mix_seed({config_.gen_seed, kSeedNoiseStream, sp, h, seed}),
                                    z.size());
    for (std::size_t k = 0; k < z.size(); ++k) z[k] += config_.sigma_s * own[k];
  }

  double margin = quality_of(arch);
  if (key.severity > 0) {
    const double strength = key.severity / double(kMaxSeverity) *
                            (1.0 - robustness_of(arch));
    margin *= 1.0 - config_.shift_margin * strength;
    const auto seed_arch = mix_seed({config_.gen_seed, kArchShiftStream, sp, h});
    const auto own = key.split == Split::kVal ? gaussian_field(seed_arch, z.size())
                                              : laplace_field(seed_arch, z.size());
    const auto& shared = f.family_shift[g];
    const double scale = config_.shift_noise * strength / std::sqrt(2.0);
    for (std::size_t k = 0; k < z.size(); ++k) {
      z[k] += scale * (shared[k] + own[k]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) z[i * c + f.labels[i]] += margin;
  return PredictionMatrix::from_logits(n, c, z);
}

void SyntheticBenchmark::for_each_architecture(
    const std::function<void(const Architecture&)>& visit) const {
  for (const auto& a : enumerate_architectures(space_)) visit(a);
}

StoreManifest materialize(const TabularSource& source, PredictionStore& store,
                          std::vector<SplitKey> keys, std::size_t seeds) {
  if (keys.empty()) keys = source.split_keys();
  if (seeds == 0) seeds = source.seeds_per_arch();
  if (seeds > source.seeds_per_arch()) {
    throw ConfigError("requested more seeds than the source provides");
  }
  for (auto key : keys) store.set_labels(key, source.labels(key));
  std::vector<std::pair<StoreKey, PredictionMatrix>> batch;
  constexpr std::size_t kBatch = 512;
  source.for_each_architecture([&](const Architecture& arch) {
    const auto genome = arch.to_string(source.space());
    for (std::size_t s = 0; s < seeds; ++s) {
      for (auto key : keys) {
        if (store.contains({genome, s, key})) continue;
        batch.push_back({{genome, s, key}, source.predictions(arch, s, key)});
      }
    }
    if (batch.size() >= kBatch) {
      store.put_batch(batch);
      batch.clear();
    }
  });
  if (!batch.empty()) store.put_batch(batch);
  return store.manifest();
}

}  // namespace nes
