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

#include "nes/selection/ensemble_selection.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include <spdlog/spdlog.h>

#include "nes/core/metrics.h"

namespace nes {
namespace {

double clamped_neg_log(double p) {
  return -std::log(std::max(p, kProbabilityFloor));
}

// Pool flattened into ascending-id order with each member's probability of
// the true class cached per point.
struct IndexedPool {
  std::vector<LearnerId> ids;
  std::vector<std::reference_wrapper<const PredictionMatrix>> matrices;
  std::vector<std::vector<double>> truth;
  std::size_t num_points = 0;

  IndexedPool(const PoolPredictions& pool, const LabelVector& labels) {
    if (pool.empty()) throw std::invalid_argument("empty pool");
    const PredictionMatrix& first = pool.begin()->second;
    check_paired(first, labels);
    num_points = first.num_points();
    for (const auto& [id, matrix] : pool) {
      if (!matrix.get().same_shape(first)) {
        throw std::invalid_argument("pool members differ in shape");
      }
      ids.push_back(id);
      matrices.push_back(matrix);
      std::vector<double> t(num_points);
      for (std::size_t i = 0; i < num_points; ++i) {
        t[i] = matrix.get()(i, labels[i]);
      }
      truth.push_back(std::move(t));
    }
  }

  std::size_t size() const { return ids.size(); }

  double member_nll(std::size_t k) const {
    double total = 0.0;
    for (double p : truth[k]) total += clamped_neg_log(p);
    return total / static_cast<double>(num_points);
  }

  // NLL of the uniform average of the members summed into `sum` plus
  // candidate k, for an ensemble of `size` members in total.
  double extended_nll(std::span<const double> sum, std::size_t k,
                      std::size_t size) const {
    const double inv = 1.0 / static_cast<double>(size);
    double total = 0.0;
    for (std::size_t i = 0; i < num_points; ++i) {
      total += clamped_neg_log((sum[i] + truth[k][i]) * inv);
    }
    return total / static_cast<double>(num_points);
  }

  // Indices sorted by individual NLL, ties by id.
  std::vector<std::size_t> by_individual_nll() const {
    std::vector<double> losses(size());
    for (std::size_t k = 0; k < size(); ++k) losses[k] = member_nll(k);
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return losses[a] < losses[b];
    });
    return order;
  }
};

void check_size(std::size_t m, std::size_t pool_size, bool need_pool_ge_m) {
  if (m < 1) throw std::invalid_argument("ensemble size must be >= 1");
  if (need_pool_ge_m && pool_size < m) {
    throw std::invalid_argument("pool of size " + std::to_string(pool_size) +
                                " cannot supply " + std::to_string(m) +
                                " distinct members");
  }
}

// Diversity of the ensemble formed by the members summed into `row_sum`
// (listed in `chosen`) plus candidate k.
double extended_diversity(const IndexedPool& pool,
                          std::span<const std::size_t> chosen,
                          std::span<const double> row_sum, std::size_t k) {
  const PredictionMatrix& cand = pool.matrices[k];
  const std::size_t n = cand.num_points();
  const std::size_t c = cand.num_classes();
  const double size = static_cast<double>(chosen.size() + 1);
  std::vector<double> mean(n * c);
  for (std::size_t j = 0; j < n * c; ++j) {
    mean[j] = (row_sum[j] + cand.values()[j]) / size;
  }
  auto distance = [&](const PredictionMatrix& member) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      for (std::size_t cls = 0; cls < c; ++cls) {
        const double d = member(i, cls) - mean[i * c + cls];
        sq += d * d;
      }
      total += std::sqrt(sq);
    }
    return total;
  };
  double total = distance(cand);
  for (std::size_t idx : chosen) total += distance(pool.matrices[idx]);
  return total / (size * static_cast<double>(n));
}

EnsembleSelection greedy_select(const PoolPredictions& pool_preds,
                                const LabelVector& labels, std::size_t m,
                                bool with_replacement, double lambda) {
  const IndexedPool pool(pool_preds, labels);
  check_size(m, pool.size(), !with_replacement);
  const std::size_t n = pool.num_points;
  const PredictionMatrix& first = pool.matrices.front();
  const std::size_t cells = n * first.num_classes();

  std::vector<double> truth_sum(n, 0.0);
  std::vector<double> row_sum(lambda > 0.0 ? cells : 0, 0.0);
  std::vector<bool> used(pool.size(), false);
  std::vector<std::size_t> chosen;
  EnsembleSelection selection;

  for (std::size_t step = 0; step < m; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = pool.size();
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (!with_replacement && used[k]) continue;
      double objective = pool.extended_nll(truth_sum, k, step + 1);
      if (lambda > 0.0) {
        objective -= lambda * extended_diversity(pool, chosen, row_sum, k);
      }
      if (objective < best) {
        best = objective;
        best_k = k;
      }
    }
    if (best_k == pool.size()) {
      // Every objective was NaN; fall back to the first eligible id.
      for (best_k = 0; !with_replacement && used[best_k]; ++best_k) {
      }
    }
    used[best_k] = true;
    chosen.push_back(best_k);
    for (std::size_t i = 0; i < n; ++i) truth_sum[i] += pool.truth[best_k][i];
    if (!row_sum.empty()) {
      auto values = pool.matrices[best_k].get().values();
      for (std::size_t j = 0; j < cells; ++j) row_sum[j] += values[j];
    }
    selection.member_ids.push_back(pool.ids[best_k]);
  }
  return selection;
}

std::uint64_t binomial_capped(std::size_t n, std::size_t k, double cap) {
  double result = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
    if (result > cap) return static_cast<std::uint64_t>(cap) + 1;
  }
  return static_cast<std::uint64_t>(std::llround(result));
}

}  // namespace

PoolPredictions make_pool(std::span<const PredictionMatrix> matrices) {
  PoolPredictions pool;
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    pool.emplace(LearnerId{static_cast<std::uint32_t>(k)}, matrices[k]);
  }
  return pool;
}

void EnsembleSelection::validate(bool allow_repeats) const {
  if (member_ids.empty()) throw std::invalid_argument("empty selection");
  if (!allow_repeats) {
    std::set<LearnerId> seen(member_ids.begin(), member_ids.end());
    if (seen.size() != member_ids.size()) {
      throw std::invalid_argument("selection repeats a pool member");
    }
  }
  if (weights) {
    if (weights->size() != member_ids.size()) {
      throw std::invalid_argument("selection weights misaligned with ids");
    }
    double total = 0.0;
    for (double w : *weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("negative weight");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-8) {
      throw std::invalid_argument("selection weights do not sum to 1");
    }
  }
}

MemberList EnsembleSelection::members(const PoolPredictions& pool) const {
  MemberList out;
  out.reserve(member_ids.size());
  for (LearnerId id : member_ids) {
    auto it = pool.find(id);
    if (it == pool.end()) {
      throw std::invalid_argument("selection references unknown id " +
                                  std::to_string(id.value));
    }
    out.push_back(it->second);
  }
  return out;
}

double selection_nll(const EnsembleSelection& selection,
                     const PoolPredictions& pool, const LabelVector& labels) {
  const MemberList members = selection.members(pool);
  std::optional<std::span<const double>> weights;
  if (selection.weights) weights = *selection.weights;
  return nll(ensemble_average(members, weights), labels);
}

EnsembleSelection forward_select(const PoolPredictions& pool,
                                 const LabelVector& labels, std::size_t m,
                                 bool with_replacement) {
  return greedy_select(pool, labels, m, with_replacement, 0.0);
}

EnsembleSelection forward_select_diverse(const PoolPredictions& pool,
                                         const LabelVector& labels,
                                         std::size_t m, double lambda) {
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("diversity strength must be >= 0");
  }
  return greedy_select(pool, labels, m, false, lambda);
}

EnsembleSelection top_m(const PoolPredictions& pool_preds,
                        const LabelVector& labels, std::size_t m) {
  const IndexedPool pool(pool_preds, labels);
  check_size(m, pool.size(), true);
  const auto order = pool.by_individual_nll();
  EnsembleSelection selection;
  for (std::size_t r = 0; r < m; ++r) {
    selection.member_ids.push_back(pool.ids[order[r]]);
  }
  return selection;
}

EnsembleSelection quick_and_greedy(const PoolPredictions& pool_preds,
                                   const LabelVector& labels, std::size_t m) {
  const IndexedPool pool(pool_preds, labels);
  check_size(m, pool.size(), false);
  const auto order = pool.by_individual_nll();

  std::vector<double> truth_sum(pool.num_points, 0.0);
  auto add = [&](std::size_t k) {
    for (std::size_t i = 0; i < pool.num_points; ++i) {
      truth_sum[i] += pool.truth[k][i];
    }
  };
  EnsembleSelection selection;
  selection.member_ids.push_back(pool.ids[order.front()]);
  add(order.front());
  double current = pool.member_nll(order.front());
  for (std::size_t r = 1; r < order.size() && selection.member_ids.size() < m;
       ++r) {
    const double candidate = pool.extended_nll(
        truth_sum, order[r], selection.member_ids.size() + 1);
    if (candidate < current) {
      current = candidate;
      add(order[r]);
      selection.member_ids.push_back(pool.ids[order[r]]);
    }
  }
  return selection;
}

StackingResult learn_stacking_weights(
    const PoolPredictions& pool_preds, const LabelVector& labels,
    const StackingOptions& options,
    const std::function<void(std::span<const double>)>& on_step) {
  const IndexedPool pool(pool_preds, labels);
  const std::size_t k_count = pool.size();
  const std::size_t n = pool.num_points;
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> weights(k_count, 1.0 / static_cast<double>(k_count));
  std::vector<double> mix(n);
  auto evaluate = [&](std::span<const double> w) {
    std::fill(mix.begin(), mix.end(), 0.0);
    for (std::size_t k = 0; k < k_count; ++k) {
      for (std::size_t i = 0; i < n; ++i) mix[i] += w[k] * pool.truth[k][i];
    }
    double total = 0.0;
    for (double p : mix) total += clamped_neg_log(p);
    return total * inv_n;
  };

  StackingResult result;
  result.weights = weights;
  result.nll = evaluate(weights);
  double previous = result.nll;
  std::vector<double> exponent(k_count);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    // `mix` holds the mixture for the current weights here.
    for (std::size_t k = 0; k < k_count; ++k) {
      double grad = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        grad -= pool.truth[k][i] / std::max(mix[i], kProbabilityFloor);
      }
      exponent[k] = -options.step_size * grad * inv_n;
    }
    const double shift = *std::max_element(exponent.begin(), exponent.end());
    double total = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      weights[k] *= std::exp(exponent[k] - shift);
      total += weights[k];
    }
    for (double& w : weights) w /= total;
    if (on_step) on_step(weights);

    const double current = evaluate(weights);
    result.iterations = iter + 1;
    if (current < result.nll) {
      result.nll = current;
      result.weights = weights;
    }
    if (previous - current < options.tolerance) {
      result.converged = true;
      break;
    }
    previous = current;
  }
  return result;
}

EnsembleSelection stacking_select(const PoolPredictions& pool,
                                  const LabelVector& labels, std::size_t m,
                                  bool weighted_output,
                                  const StackingOptions& options) {
  check_size(m, pool.size(), true);
  const StackingResult stacked = learn_stacking_weights(pool, labels, options);
  if (!stacked.converged) {
    spdlog::warn("stacking stopped after {} iterations without converging",
                 stacked.iterations);
  }
  std::vector<LearnerId> ids;
  for (const auto& entry : pool) ids.push_back(entry.first);
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return stacked.weights[a] > stacked.weights[b];
  });

  EnsembleSelection selection;
  std::vector<double> kept;
  for (std::size_t r = 0; r < m; ++r) {
    selection.member_ids.push_back(ids[order[r]]);
    kept.push_back(stacked.weights[order[r]]);
  }
  if (weighted_output) {
    const double total = std::accumulate(kept.begin(), kept.end(), 0.0);
    if (total > 0.0) {
      for (double& w : kept) w /= total;
    } else {
      std::fill(kept.begin(), kept.end(), 1.0 / static_cast<double>(m));
    }
    selection.weights = std::move(kept);
  }
  return selection;
}

EnsembleSelection bma_reweight(const EnsembleSelection& selection,
                               const PoolPredictions& pool,
                               const LabelVector& labels, BmaScheme scheme) {
  const MemberList members = selection.members(pool);
  if (members.empty()) throw std::invalid_argument("empty selection");
  const std::size_t count = members.size();
  std::vector<double> weights(count);

  if (scheme == BmaScheme::kLikelihood) {
    const double n = static_cast<double>(labels.size());
    for (std::size_t i = 0; i < count; ++i) {
      weights[i] = -n * nll(members[i], labels);
    }
    const double shift = *std::max_element(weights.begin(), weights.end());
    for (double& w : weights) w = std::exp(w - shift);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      weights[i] = 1.0 - classification_error(members[i], labels);
    }
  }
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0.0) {
    spdlog::warn("all members have zero validation accuracy; using uniform "
                 "weights");
    std::fill(weights.begin(), weights.end(), 1.0);
    total = static_cast<double>(count);
  }
  for (double& w : weights) w /= total;

  EnsembleSelection out;
  out.member_ids = selection.member_ids;
  out.weights = std::move(weights);
  return out;
}

double ensemble_diversity(const MemberList& members) {
  const PredictionMatrix mean = ensemble_average(members);
  const std::size_t n = mean.num_points();
  double total = 0.0;
  for (const PredictionMatrix& m : members) {
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      for (std::size_t c = 0; c < mean.num_classes(); ++c) {
        const double d = m(i, c) - mean(i, c);
        sq += d * d;
      }
      total += std::sqrt(sq);
    }
  }
  return total / (static_cast<double>(members.size()) * static_cast<double>(n));
}

EnsembleSelection exhaustive_select(const PoolPredictions& pool_preds,
                                    const LabelVector& labels, std::size_t m) {
  const IndexedPool pool(pool_preds, labels);
  check_size(m, pool.size(), true);
  if (binomial_capped(pool.size(), m, kExhaustiveSubsetLimit) >
      kExhaustiveSubsetLimit) {
    throw std::invalid_argument("exhaustive selection over C(" +
                                std::to_string(pool.size()) + ", " +
                                std::to_string(m) + ") subsets refused");
  }
  const std::size_t n = pool.num_points;
  const double inv = 1.0 / static_cast<double>(m);

  std::vector<std::size_t> combo(m);
  std::iota(combo.begin(), combo.end(), 0);
  std::vector<std::size_t> best_combo = combo;
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t k : combo) sum += pool.truth[k][i];
      total += clamped_neg_log(sum * inv);
    }
    total /= static_cast<double>(n);
    if (total < best) {
      best = total;
      best_combo = combo;
    }
    // Next combination in lexicographic order.
    std::size_t pos = m;
    while (pos > 0 && combo[pos - 1] == pool.size() - m + pos - 1) --pos;
    if (pos == 0) break;
    ++combo[pos - 1];
    for (std::size_t j = pos; j < m; ++j) combo[j] = combo[j - 1] + 1;
  }
  EnsembleSelection selection;
  for (std::size_t k : best_combo) selection.member_ids.push_back(pool.ids[k]);
  return selection;
}

}  // namespace nes
