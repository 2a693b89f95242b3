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

#include "nes/toy/toy_task.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "nes/error.h"

namespace nes {
namespace {

constexpr std::size_t kPermutationBlock = 4;

ToyDataset sample_points(const Eigen::MatrixXd& centers, std::size_t clusters,
                         std::size_t classes, double overlap, std::size_t n,
                         DataSplit split, Rng& rng) {
  std::uniform_int_distribution<std::uint32_t> cls(
      0, static_cast<std::uint32_t>(classes - 1));
  std::uniform_int_distribution<std::size_t> cluster(0, clusters - 1);
  std::normal_distribution<double> normal;
  ToyDataset data;
  data.split = split;
  data.features.resize(centers.rows(), static_cast<Eigen::Index>(n));
  std::vector<std::uint32_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = cls(rng);
    const auto center = static_cast<Eigen::Index>(y[i] * clusters + cluster(rng));
    for (Eigen::Index d = 0; d < centers.rows(); ++d) {
      data.features(d, static_cast<Eigen::Index>(i)) =
          centers(d, center) + overlap * normal(rng);
    }
  }
  data.labels = LabelVector(std::move(y));
  return data;
}

}  // namespace

void ToyTaskConfig::validate() const {
  if (num_classes < 2) throw ConfigError("toy task needs at least 2 classes");
  if (input_dim < 2) throw ConfigError("toy task needs input_dim >= 2");
  if (num_train == 0 || num_val == 0 || num_test == 0) {
    throw ConfigError("toy task split sizes must be positive");
  }
  if (clusters_per_class == 0) throw ConfigError("clusters_per_class must be >= 1");
  if (separation <= 0 || overlap < 0) {
    throw ConfigError("toy task needs separation > 0 and overlap >= 0");
  }
}

ToyTask make_toy_task(const ToyTaskConfig& config) {
  config.validate();
  Rng rng(mix_seed({config.task_seed, 0x7a5c}));
  std::normal_distribution<double> normal;
  const auto d = static_cast<Eigen::Index>(config.input_dim);
  const auto k = static_cast<Eigen::Index>(config.num_classes * config.clusters_per_class);
  Eigen::MatrixXd centers(d, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index r = 0; r < d; ++r) centers(r, j) = config.separation * normal(rng);
  }
  auto split = [&](std::size_t n, DataSplit s, std::uint64_t stream) {
    Rng split_rng(mix_seed({config.task_seed, 0x7a5c, stream}));
    return sample_points(centers, config.clusters_per_class, config.num_classes,
                         config.overlap, n, s, split_rng);
  };
  return {split(config.num_train, DataSplit::kTrain, 1),
          split(config.num_val, DataSplit::kVal, 2),
          split(config.num_test, DataSplit::kTest, 3)};
}

const std::vector<std::string>& corruption_operators(CorruptionFamily family) {
  static const std::vector<std::string> kNone;
  static const std::vector<std::string> kValidation = {
      "gaussian_noise", "feature_dropout", "smooth_warp"};
  static const std::vector<std::string> kTest = {
      "multiplicative_noise", "block_permutation", "heavy_tail_noise"};
  switch (family) {
    case CorruptionFamily::kValidation:
      return kValidation;
    case CorruptionFamily::kTest:
      return kTest;
    case CorruptionFamily::kNone:
      break;
  }
  return kNone;
}

ToyDataset corrupt(const ToyDataset& dataset, CorruptionFamily family,
                   int severity, Rng& rng) {
  if (dataset.severity != 0 || dataset.family != CorruptionFamily::kNone) {
    throw std::invalid_argument("dataset is already corrupted");
  }
  if (family == CorruptionFamily::kNone) {
    throw std::invalid_argument("corruption family must be validation or test");
  }
  if (severity < 1 || severity > 5) {
    throw std::invalid_argument("corruption severity must lie in 1..5");
  }
  const double s = severity;
  const Eigen::Index dim = dataset.features.rows();
  const std::size_t blocks = (static_cast<std::size_t>(dim) + kPermutationBlock - 1) /
                             kPermutationBlock;
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal;
  std::student_t_distribution<double> heavy(3.0);

  ToyDataset out = dataset;
  out.severity = severity;
  out.family = family;
  std::vector<double> z(dim), u(dim), t(dim), phase(dim), block_u(blocks);
  std::vector<std::vector<Eigen::Index>> perms(blocks);
  for (Eigen::Index i = 0; i < out.features.cols(); ++i) {
    // Draw everything up front so the stream is independent of the operator
    // and of the severity.
    const int op = pick(rng);
    for (Eigen::Index d = 0; d < dim; ++d) {
      z[d] = normal(rng);
      u[d] = uniform(rng);
      t[d] = heavy(rng);
      phase[d] = 2.0 * M_PI * uniform(rng);
    }
    for (std::size_t b = 0; b < blocks; ++b) {
      block_u[b] = uniform(rng);
      const auto lo = static_cast<Eigen::Index>(b * kPermutationBlock);
      const auto hi = std::min(dim, lo + static_cast<Eigen::Index>(kPermutationBlock));
      perms[b].resize(static_cast<std::size_t>(hi - lo));
      std::iota(perms[b].begin(), perms[b].end(), lo);
      std::shuffle(perms[b].begin(), perms[b].end(), rng);
    }
    auto x = out.features.col(i);
    const Eigen::VectorXd original = x;
    if (family == CorruptionFamily::kValidation) {
      for (Eigen::Index d = 0; d < dim; ++d) {
        switch (op) {
          case 0:
            x[d] += 0.15 * s * z[d];
            break;
          case 1:
            if (u[d] < 0.08 * s) x[d] = 0.0;
            break;
          default:
            x[d] += 0.15 * s * std::sin(2.0 * original[d] + phase[d]);
            break;
        }
      }
    } else {
      switch (op) {
        case 0:
          for (Eigen::Index d = 0; d < dim; ++d) x[d] *= 1.0 + 0.12 * s * z[d];
          break;
        case 1:
          for (std::size_t b = 0; b < blocks; ++b) {
            if (block_u[b] >= 0.18 * s) continue;
            const auto lo = static_cast<Eigen::Index>(b * kPermutationBlock);
            for (std::size_t k = 0; k < perms[b].size(); ++k) {
              x[lo + static_cast<Eigen::Index>(k)] = original[perms[b][k]];
            }
          }
          break;
        default:
          for (Eigen::Index d = 0; d < dim; ++d) x[d] += 0.1 * s * t[d];
          break;
      }
    }
  }
  return out;
}

}  // namespace nes
