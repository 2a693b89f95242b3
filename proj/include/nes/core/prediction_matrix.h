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

#ifndef NES_CORE_PREDICTION_MATRIX_H_
#define NES_CORE_PREDICTION_MATRIX_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace nes {

// Row-stochastic N x C matrix of class probabilities produced by one network
// on one evaluation split. Stored row-major in double precision.
class PredictionMatrix {
 public:
  // Validates that N >= 1, C >= 2, every entry lies in [0, 1] and every row
  // sums to 1 within kRowSumTolerance. Throws std::invalid_argument otherwise.
  PredictionMatrix(std::size_t num_points, std::size_t num_classes,
                   std::vector<double> probs);

  // Row-wise softmax of an N x C logit matrix.
  static PredictionMatrix from_logits(std::size_t num_points,
                                      std::size_t num_classes,
                                      std::span<const double> logits);

  std::size_t num_points() const { return num_points_; }
  std::size_t num_classes() const { return num_classes_; }

  double operator()(std::size_t point, std::size_t cls) const {
    return probs_[point * num_classes_ + cls];
  }
  std::span<const double> row(std::size_t point) const {
    return {probs_.data() + point * num_classes_, num_classes_};
  }
  std::span<const double> values() const { return probs_; }

  // Index of the largest entry in `point`'s row; ties go to the lowest index.
  std::size_t argmax(std::size_t point) const;

  bool same_shape(const PredictionMatrix& other) const {
    return num_points_ == other.num_points_ &&
           num_classes_ == other.num_classes_;
  }

  friend bool operator==(const PredictionMatrix&,
                         const PredictionMatrix&) = default;

  static constexpr double kRowSumTolerance = 1e-6;

 private:
  std::size_t num_points_;
  std::size_t num_classes_;
  std::vector<double> probs_;
};

// Ground-truth class indices paired with a PredictionMatrix.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::vector<std::uint32_t> labels)
      : labels_(std::move(labels)) {}

  std::size_t size() const { return labels_.size(); }
  std::uint32_t operator[](std::size_t i) const { return labels_[i]; }
  std::span<const std::uint32_t> values() const { return labels_; }

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<std::uint32_t> labels_;
};

// Non-owning list of ensemble members.
using MemberList = std::vector<std::reference_wrapper<const PredictionMatrix>>;

MemberList as_members(std::span<const PredictionMatrix> matrices);

// Throws std::invalid_argument unless `labels` pairs with `pred` (same length,
// every label < C).
void check_paired(const PredictionMatrix& pred, const LabelVector& labels);

// Throws std::invalid_argument on an empty list or mismatched shapes.
void check_members(const MemberList& members);

}  // namespace nes

#endif  // NES_CORE_PREDICTION_MATRIX_H_
