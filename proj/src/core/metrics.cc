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

#include "nes/core/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nes {
namespace {

double clamped_log(double p) { return std::log(std::max(p, kProbabilityFloor)); }

std::vector<double> resolve_weights(
    std::size_t count, std::optional<std::span<const double>> weights) {
  if (!weights) {
    return std::vector<double>(count, 1.0 / static_cast<double>(count));
  }
  if (weights->size() != count) {
    throw std::invalid_argument("weight count does not match member count");
  }
  double total = 0.0;
  for (double w : *weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("negative ensemble weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-8) {
    throw std::invalid_argument("ensemble weights do not sum to 1");
  }
  return {weights->begin(), weights->end()};
}

}  // namespace

PredictionMatrix ensemble_average(
    const MemberList& members,
    std::optional<std::span<const double>> weights, AveragingMode mode) {
  check_members(members);
  const std::vector<double> w = resolve_weights(members.size(), weights);
  const PredictionMatrix& first = members.front();
  const std::size_t n = first.num_points();
  const std::size_t c = first.num_classes();

  std::vector<double> out(n * c, 0.0);
  for (std::size_t m = 0; m < members.size(); ++m) {
    auto values = members[m].get().values();
    if (mode == AveragingMode::kProbability) {
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += w[m] * values[k];
    } else {
      for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] += w[m] * clamped_log(values[k]);
      }
    }
  }
  if (mode == AveragingMode::kLogit) {
    return PredictionMatrix::from_logits(n, c, out);
  }
  // Rounding can push a one-hot average a hair above 1.
  for (double& p : out) p = std::min(p, 1.0);
  return PredictionMatrix(n, c, std::move(out));
}

double nll(const PredictionMatrix& pred, const LabelVector& labels) {
  check_paired(pred, labels);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.num_points(); ++i) {
    total -= clamped_log(pred(i, labels[i]));
  }
  return total / static_cast<double>(pred.num_points());
}

double classification_error(const PredictionMatrix& pred,
                            const LabelVector& labels) {
  check_paired(pred, labels);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < pred.num_points(); ++i) {
    if (pred.argmax(i) != labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(pred.num_points());
}

double ece(const PredictionMatrix& pred, const LabelVector& labels,
           std::size_t num_bins) {
  check_paired(pred, labels);
  if (num_bins < 1) throw std::invalid_argument("ECE needs at least one bin");
  std::vector<double> conf_sum(num_bins, 0.0);
  std::vector<double> correct(num_bins, 0.0);
  std::vector<std::size_t> count(num_bins, 0);
  const double bins = static_cast<double>(num_bins);
  for (std::size_t i = 0; i < pred.num_points(); ++i) {
    const std::size_t top = pred.argmax(i);
    const double conf = pred(i, top);
    // Bin b covers (b/B, (b+1)/B].
    auto b = static_cast<std::ptrdiff_t>(std::ceil(conf * bins)) - 1;
    b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(num_bins) - 1);
    conf_sum[b] += conf;
    correct[b] += top == labels[i] ? 1.0 : 0.0;
    ++count[b];
  }
  double total = 0.0;
  for (std::size_t b = 0; b < num_bins; ++b) {
    if (count[b] == 0) continue;
    const double size = static_cast<double>(count[b]);
    total += std::abs(correct[b] - conf_sum[b]) / size *
             (size / static_cast<double>(pred.num_points()));
  }
  return total;
}

double oracle_nll(const MemberList& members, const LabelVector& labels) {
  check_members(members);
  const PredictionMatrix& first = members.front();
  check_paired(first, labels);
  double total = 0.0;
  for (std::size_t i = 0; i < first.num_points(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const PredictionMatrix& m : members) {
      best = std::min(best, -clamped_log(m(i, labels[i])));
    }
    total += best;
  }
  return total / static_cast<double>(first.num_points());
}

double avg_base_learner_nll(const MemberList& members,
                            const LabelVector& labels) {
  check_members(members);
  double total = 0.0;
  for (const PredictionMatrix& m : members) total += nll(m, labels);
  return total / static_cast<double>(members.size());
}

double predictive_disagreement(const MemberList& members,
                               const LabelVector& labels) {
  if (members.size() < 2) {
    throw std::invalid_argument("predictive disagreement needs >= 2 members");
  }
  check_members(members);
  const std::size_t n = members.front().get().num_points();
  check_paired(members.front(), labels);

  std::vector<std::vector<std::size_t>> top(members.size());
  double mean_error = 0.0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    top[m].resize(n);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
      top[m][i] = members[m].get().argmax(i);
      if (top[m][i] != labels[i]) ++wrong;
    }
    mean_error += static_cast<double>(wrong) / static_cast<double>(n);
  }
  mean_error /= static_cast<double>(members.size());

  double disagreement = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      std::size_t differ = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (top[a][i] != top[b][i]) ++differ;
      }
      disagreement += static_cast<double>(differ) / static_cast<double>(n);
      ++pairs;
    }
  }
  disagreement /= static_cast<double>(pairs);

  if (mean_error == 0.0) {
    return disagreement > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return disagreement / mean_error;
}

NllOrdering nll_ordering_check(const MemberList& members,
                                      const LabelVector& labels) {
  NllOrdering r{};
  r.oracle_nll = oracle_nll(members, labels);
  r.ensemble_nll = nll(ensemble_average(members), labels);
  r.avg_base_learner_nll = avg_base_learner_nll(members, labels);
  r.holds = r.oracle_nll <= r.ensemble_nll + kNllOrderingSlack &&
            r.ensemble_nll <= r.avg_base_learner_nll + kNllOrderingSlack;
  return r;
}

EvalReport evaluate_ensemble(const MemberList& members,
                             const LabelVector& labels,
                             std::optional<std::span<const double>> weights,
                             AveragingMode mode, std::size_t num_bins) {
  const PredictionMatrix ensemble = ensemble_average(members, weights, mode);
  EvalReport report;
  report.nll = nll(ensemble, labels);
  report.error = classification_error(ensemble, labels);
  report.ece = ece(ensemble, labels, num_bins);
  report.oracle_nll = oracle_nll(members, labels);
  report.avg_bsl_nll = avg_base_learner_nll(members, labels);
  report.pred_disagreement =
      members.size() >= 2 ? predictive_disagreement(members, labels) : 0.0;
  return report;
}

}  // namespace nes
