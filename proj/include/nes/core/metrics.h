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

#ifndef NES_CORE_METRICS_H_
#define NES_CORE_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nes/core/prediction_matrix.h"

namespace nes {

// Lower clamp applied to probabilities before taking a log.
inline constexpr double kProbabilityFloor = 1e-12;

inline constexpr std::size_t kDefaultEceBins = 15;

enum class AveragingMode { kProbability, kLogit };

// F(x) = sum_i w_i f_i(x). Uniform weights when `weights` is empty. In logit
// mode the clamped log-probabilities are averaged and re-softmaxed.
PredictionMatrix ensemble_average(
    const MemberList& members,
    std::optional<std::span<const double>> weights = std::nullopt,
    AveragingMode mode = AveragingMode::kProbability);

// Mean negative log-likelihood of the true class, in nats per point.
double nll(const PredictionMatrix& pred, const LabelVector& labels);

// Fraction of points whose argmax differs from the label.
double classification_error(const PredictionMatrix& pred,
                            const LabelVector& labels);

// Expected calibration error with `num_bins` equal-width, right-closed bins
// over (0, 1]. Confidence is the maximum row probability.
double ece(const PredictionMatrix& pred, const LabelVector& labels,
           std::size_t num_bins = kDefaultEceBins);

// NLL of the per-point oracle that always picks the member with the smallest
// loss.
double oracle_nll(const MemberList& members, const LabelVector& labels);

double avg_base_learner_nll(const MemberList& members,
                            const LabelVector& labels);

// Mean pairwise argmax disagreement divided by the mean member error.
// Returns +inf when the mean error is 0 but members disagree, and 0 when both
// are 0. Requires at least two members.
double predictive_disagreement(const MemberList& members,
                               const LabelVector& labels);

struct NllOrdering {
  double oracle_nll;
  double ensemble_nll;
  double avg_base_learner_nll;
  bool holds;
};

inline constexpr double kNllOrderingSlack = 1e-9;

// oracle <= ensemble <= average for the uniform probability-averaged
// ensemble, within kNllOrderingSlack.
NllOrdering nll_ordering_check(const MemberList& members,
                                      const LabelVector& labels);

struct EvalReport {
  double nll = 0.0;
  double error = 0.0;
  double ece = 0.0;
  double oracle_nll = 0.0;
  double avg_bsl_nll = 0.0;
  // 0 for single-member ensembles.
  double pred_disagreement = 0.0;
};

// All six metrics for one ensemble on one split.
EvalReport evaluate_ensemble(
    const MemberList& members, const LabelVector& labels,
    std::optional<std::span<const double>> weights = std::nullopt,
    AveragingMode mode = AveragingMode::kProbability,
    std::size_t num_bins = kDefaultEceBins);

}  // namespace nes

#endif  // NES_CORE_METRICS_H_
