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

// Random instance generators and brute-force reference implementations used
// by the unit and acceptance suites. Nothing here calls into the library's
// metric or selection code.
#ifndef NES_TESTS_SUPPORT_ORACLES_H_
#define NES_TESTS_SUPPORT_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "nes/core/prediction_matrix.h"

namespace nes::testing {

inline constexpr double kFloor = 1e-12;

// Rows drawn from a flat Dirichlet via normalized exponentials.
inline PredictionMatrix random_matrix(std::mt19937_64& rng, std::size_t n,
                                      std::size_t c, double sharpness = 1.0) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> probs(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      probs[i * c + k] = std::pow(expo(rng), sharpness);
      total += probs[i * c + k];
    }
    for (std::size_t k = 0; k < c; ++k) probs[i * c + k] /= total;
  }
  return PredictionMatrix(n, c, std::move(probs));
}

inline LabelVector random_labels(std::mt19937_64& rng, std::size_t n,
                                 std::size_t c) {
  std::uniform_int_distribution<std::uint32_t> pick(
      0, static_cast<std::uint32_t>(c - 1));
  std::vector<std::uint32_t> y(n);
  for (auto& v : y) v = pick(rng);
  return LabelVector(std::move(y));
}

inline std::vector<PredictionMatrix> random_members(std::mt19937_64& rng,
                                                    std::size_t m,
                                                    std::size_t n,
                                                    std::size_t c) {
  std::vector<PredictionMatrix> out;
  for (std::size_t k = 0; k < m; ++k) out.push_back(random_matrix(rng, n, c));
  return out;
}

// Plain triple loop: sum_m w_m p_m(i, c).
inline std::vector<double> weighted_sum_oracle(
    const std::vector<PredictionMatrix>& members,
    const std::vector<double>& weights) {
  const std::size_t n = members[0].num_points();
  const std::size_t c = members[0].num_classes();
  std::vector<double> out(n * c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < c; ++k) {
      double acc = 0.0;
      for (std::size_t m = 0; m < members.size(); ++m) {
        acc += weights[m] * members[m](i, k);
      }
      out[i * c + k] = acc;
    }
  }
  return out;
}

inline std::size_t argmax_oracle(const PredictionMatrix& p, std::size_t i) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.num_classes(); ++k) {
    if (p(i, k) > p(i, best)) best = k;
  }
  return best;
}

inline double nll_oracle(const PredictionMatrix& p, const LabelVector& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.num_points(); ++i) {
    double prob = p(i, y[i]);
    if (prob < kFloor) prob = kFloor;
    total += -std::log(prob);
  }
  return total / static_cast<double>(p.num_points());
}

inline double error_oracle(const PredictionMatrix& p, const LabelVector& y) {
  double wrong = 0.0;
  for (std::size_t i = 0; i < p.num_points(); ++i) {
    if (argmax_oracle(p, i) != y[i]) wrong += 1.0;
  }
  return wrong / static_cast<double>(p.num_points());
}

// Scans every bin and collects its members by interval membership.
inline double ece_oracle(const PredictionMatrix& p, const LabelVector& y,
                         std::size_t bins) {
  const double n = static_cast<double>(p.num_points());
  double total = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = static_cast<double>(b) / static_cast<double>(bins);
    const double hi = static_cast<double>(b + 1) / static_cast<double>(bins);
    double count = 0.0, conf = 0.0, correct = 0.0;
    for (std::size_t i = 0; i < p.num_points(); ++i) {
      const std::size_t top = argmax_oracle(p, i);
      const double c = p(i, top);
      const bool inside = (c > lo || (b == 0 && c >= lo)) && c <= hi;
      if (!inside) continue;
      count += 1.0;
      conf += c;
      if (top == y[i]) correct += 1.0;
    }
    if (count > 0.0) {
      total += (count / n) * std::abs(correct / count - conf / count);
    }
  }
  return total;
}

inline double oracle_nll_oracle(const std::vector<PredictionMatrix>& members,
                                const LabelVector& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < members.size(); ++m) {
      if (members[m](i, y[i]) > members[best](i, y[i])) best = m;
    }
    double prob = members[best](i, y[i]);
    if (prob < kFloor) prob = kFloor;
    total += -std::log(prob);
  }
  return total / static_cast<double>(y.size());
}

inline double disagreement_oracle(const std::vector<PredictionMatrix>& members,
                                  const LabelVector& y) {
  double dis = 0.0, pairs = 0.0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = 0; b < members.size(); ++b) {
      if (b <= a) continue;
      double differ = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (argmax_oracle(members[a], i) != argmax_oracle(members[b], i)) {
          differ += 1.0;
        }
      }
      dis += differ / static_cast<double>(y.size());
      pairs += 1.0;
    }
  }
  dis /= pairs;
  double err = 0.0;
  for (const auto& m : members) err += error_oracle(m, y);
  err /= static_cast<double>(members.size());
  if (err == 0.0) {
    return dis > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return dis / err;
}

// NLL of the uniform average of `members[idx]` for every idx in `subset`,
// computed by a direct per-point loop.
inline double subset_nll_oracle(const std::vector<PredictionMatrix>& members,
                                const std::vector<std::size_t>& subset,
                                const LabelVector& y) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double p = 0.0;
    for (std::size_t idx : subset) p += members[idx](i, y[i]);
    p /= static_cast<double>(subset.size());
    if (p < kFloor) p = kFloor;
    total += -std::log(p);
  }
  return total / static_cast<double>(y.size());
}

// Exhaustive enumeration by bitmask; returns the best subset of size m in
// ascending index order (first found wins ties).
inline std::vector<std::size_t> best_subset_oracle(
    const std::vector<PredictionMatrix>& members, std::size_t m,
    const LabelVector& y) {
  const std::size_t k = members.size();
  std::vector<std::size_t> best;
  double best_nll = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != m) continue;
    std::vector<std::size_t> subset;
    for (std::size_t j = 0; j < k; ++j) {
      if (mask & (1u << j)) subset.push_back(j);
    }
    const double v = subset_nll_oracle(members, subset, y);
    if (v < best_nll) {
      best_nll = v;
      best = subset;
    }
  }
  return best;
}

}  // namespace nes::testing

#endif  // NES_TESTS_SUPPORT_ORACLES_H_
