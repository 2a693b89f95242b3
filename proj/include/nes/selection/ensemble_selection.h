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

#ifndef NES_SELECTION_ENSEMBLE_SELECTION_H_
#define NES_SELECTION_ENSEMBLE_SELECTION_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "nes/core/prediction_matrix.h"

namespace nes {

// Identifier of a trained network inside a pool.
struct LearnerId {
  std::uint32_t value = 0;
  friend auto operator<=>(const LearnerId&, const LearnerId&) = default;
};

// Validation predictions of every pool member, keyed by id. Iteration order
// is ascending id, which is also the tie-breaking order.
using PoolPredictions =
    std::map<LearnerId, std::reference_wrapper<const PredictionMatrix>>;

// Pool view over `matrices` with ids 0..K-1.
PoolPredictions make_pool(std::span<const PredictionMatrix> matrices);

struct EnsembleSelection {
  std::vector<LearnerId> member_ids;
  // Simplex weights aligned with member_ids; empty means uniform.
  std::optional<std::vector<double>> weights;

  // Throws std::invalid_argument if empty, if weights are not on the simplex
  // or, when `allow_repeats` is false, if an id repeats.
  void validate(bool allow_repeats = false) const;

  MemberList members(const PoolPredictions& pool) const;

  friend bool operator==(const EnsembleSelection&,
                         const EnsembleSelection&) = default;
};

// Validation NLL of the probability-averaged ensemble `selection` over `pool`.
double selection_nll(const EnsembleSelection& selection,
                     const PoolPredictions& pool, const LabelVector& labels);

// Greedy forward step-wise selection minimizing ensemble validation NLL.
// Ties go to the smallest id. Without replacement the pool must hold at
// least M members.
EnsembleSelection forward_select(const PoolPredictions& pool,
                                 const LabelVector& labels, std::size_t m,
                                 bool with_replacement = false);

// The M members with the lowest individual validation NLL, best first.
EnsembleSelection top_m(const PoolPredictions& pool, const LabelVector& labels,
                        std::size_t m);

// Walks members by ascending individual NLL and keeps one only if it strictly
// lowers the ensemble NLL. May return fewer than M members.
EnsembleSelection quick_and_greedy(const PoolPredictions& pool,
                                   const LabelVector& labels, std::size_t m);

struct StackingOptions {
  double step_size = 0.1;
  std::size_t max_iterations = 500;
  double tolerance = 1e-7;
};

struct StackingResult {
  // Aligned with the pool's ascending id order.
  std::vector<double> weights;
  double nll = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Simplex weights over the whole pool minimizing validation NLL of the
// weighted average, by exponentiated gradient descent. `on_step`, when set,
// sees the weights after every update.
StackingResult learn_stacking_weights(
    const PoolPredictions& pool, const LabelVector& labels,
    const StackingOptions& options = {},
    const std::function<void(std::span<const double>)>& on_step = {});

// Keeps the M largest stacking weights. With `weighted_output` their weights
// are renormalized, otherwise the ensemble is uniform. Logs a warning if the
// optimizer hit its iteration cap.
EnsembleSelection stacking_select(const PoolPredictions& pool,
                                  const LabelVector& labels, std::size_t m,
                                  bool weighted_output,
                                  const StackingOptions& options = {});

enum class BmaScheme { kLikelihood, kAccuracy };

// Reweights the members of `selection` by normalized validation likelihood
// (proportional to exp(-N * NLL_i)) or validation accuracy.
EnsembleSelection bma_reweight(const EnsembleSelection& selection,
                               const PoolPredictions& pool,
                               const LabelVector& labels, BmaScheme scheme);

// Mean over ensemble members and points of the L2 distance between a
// member's probability row and the ensemble's row.
double ensemble_diversity(const MemberList& members);

// forward_select on the objective NLL - lambda * diversity. lambda = 0 gives
// exactly forward_select's choices.
EnsembleSelection forward_select_diverse(const PoolPredictions& pool,
                                         const LabelVector& labels,
                                         std::size_t m, double lambda);

inline constexpr double kExhaustiveSubsetLimit = 1e6;

// Exact minimum-NLL subset of size M by enumeration. Refuses when C(K, M)
// exceeds kExhaustiveSubsetLimit.
EnsembleSelection exhaustive_select(const PoolPredictions& pool,
                                    const LabelVector& labels, std::size_t m);

}  // namespace nes

#endif  // NES_SELECTION_ENSEMBLE_SELECTION_H_
