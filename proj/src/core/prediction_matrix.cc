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

#include "nes/core/prediction_matrix.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nes {

PredictionMatrix::PredictionMatrix(std::size_t num_points,
                                   std::size_t num_classes,
                                   std::vector<double> probs)
    : num_points_(num_points),
      num_classes_(num_classes),
      probs_(std::move(probs)) {
  if (num_points_ < 1 || num_classes_ < 2) {
    throw std::invalid_argument("prediction matrix needs N >= 1 and C >= 2");
  }
  if (probs_.size() != num_points_ * num_classes_) {
    throw std::invalid_argument("prediction matrix holds " +
                                std::to_string(probs_.size()) +
                                " values, expected N*C = " +
                                std::to_string(num_points_ * num_classes_));
  }
  for (std::size_t i = 0; i < num_points_; ++i) {
    double sum = 0.0;
    for (double p : row(i)) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("probability outside [0, 1] in row " +
                                    std::to_string(i));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw std::invalid_argument("row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum));
    }
  }
}

PredictionMatrix PredictionMatrix::from_logits(std::size_t num_points,
                                               std::size_t num_classes,
                                               std::span<const double> logits) {
  if (logits.size() != num_points * num_classes) {
    throw std::invalid_argument("logit matrix size does not match N*C");
  }
  std::vector<double> probs(logits.size());
  for (std::size_t i = 0; i < num_points; ++i) {
    auto in = logits.subspan(i * num_classes, num_classes);
    auto out = std::span(probs).subspan(i * num_classes, num_classes);
    const double shift = *std::max_element(in.begin(), in.end());
    if (!std::isfinite(shift)) {
      throw std::invalid_argument("non-finite logit in row " +
                                  std::to_string(i));
    }
    double total = 0.0;
    for (std::size_t c = 0; c < num_classes; ++c) {
      out[c] = std::exp(in[c] - shift);
      total += out[c];
    }
    for (double& p : out) p /= total;
  }
  return PredictionMatrix(num_points, num_classes, std::move(probs));
}

std::size_t PredictionMatrix::argmax(std::size_t point) const {
  auto r = row(point);
  // max_element returns the first maximum.
  return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) -
                                  r.begin());
}

MemberList as_members(std::span<const PredictionMatrix> matrices) {
  return MemberList(matrices.begin(), matrices.end());
}

void check_paired(const PredictionMatrix& pred, const LabelVector& labels) {
  if (labels.size() != pred.num_points()) {
    throw std::invalid_argument("label vector has " +
                                std::to_string(labels.size()) +
                                " entries for " +
                                std::to_string(pred.num_points()) + " points");
  }
  for (std::uint32_t y : labels.values()) {
    if (y >= pred.num_classes()) {
      throw std::invalid_argument("label " + std::to_string(y) +
                                  " out of range for C = " +
                                  std::to_string(pred.num_classes()));
    }
  }
}

void check_members(const MemberList& members) {
  if (members.empty()) {
    throw std::invalid_argument("empty member list");
  }
  const PredictionMatrix& first = members.front();
  for (const PredictionMatrix& m : members) {
    if (!m.same_shape(first)) {
      throw std::invalid_argument("ensemble members differ in shape");
    }
  }
}

}  // namespace nes
