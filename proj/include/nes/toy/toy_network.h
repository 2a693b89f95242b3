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

#ifndef NES_TOY_TOY_NETWORK_H_
#define NES_TOY_TOY_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "nes/core/prediction_matrix.h"
#include "nes/search/architecture.h"

namespace nes {

struct NetShape {
  std::size_t input_dim = 16;
  std::size_t num_classes = 10;
  std::size_t hidden_width = 16;
  std::size_t macro_depth = 2;

  // Throws ConfigError.
  void validate() const;
};

// A contiguous slice of the flat parameter vector holding one matrix
// (column-major) or bias vector.
struct ParameterBlock {
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool bias = false;
  // Variance of the initialization distribution; 0 for biases, which start
  // at zero.
  double init_variance = 0.0;
};

// Extra terms of the training objective. With an anchor, adds
// lambda / N * sum_i (theta_i - anchor_i)^2 / (2 sigma_i^2) over weights.
struct Regularizer {
  double l2 = 0.0;
  std::span<const double> anchor;
  double anchor_lambda = 0.0;
  std::size_t num_train = 1;
};

// Stem projection, macro_depth stacked cells, linear classifier.
//
// mlp-cell cells read the outputs of the two previous cells (the stem
// stands in for missing ones), sum edge outputs into each intermediate node
// and merge the concatenated intermediate nodes with a learned linear map.
// tabular-cell cells read the previous cell and output their last node.
class ToyNetwork {
 public:
  ToyNetwork(SearchSpace space, Architecture arch, NetShape shape);

  const NetShape& shape() const { return shape_; }
  const std::vector<ParameterBlock>& blocks() const { return blocks_; }
  std::size_t num_parameters() const { return theta_.size(); }
  std::span<double> parameters() { return theta_; }
  std::span<const double> parameters() const { return theta_; }

  // Weights from N(0, 1/fan_in), biases zero.
  std::vector<double> sample_initialization(Rng& rng) const;

  // x is D x B; returns H x B.
  Eigen::MatrixXd stem(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd features(const Eigen::MatrixXd& x) const;
  // C x B.
  Eigen::MatrixXd logits(const Eigen::MatrixXd& x) const;
  PredictionMatrix predict(const Eigen::MatrixXd& x) const;

  // Mean cross-entropy of the columns of x plus `reg`. Writes the gradient
  // with respect to parameters() when `grad` is non-null.
  double loss(const Eigen::MatrixXd& x, std::span<const std::uint32_t> labels,
              const Regularizer& reg, std::vector<double>* grad) const;

  // The regularizer alone (zero at theta == anchor with l2 == 0).
  double penalty(const Regularizer& reg) const;

 private:
  enum class Op { kLinearRelu, kLinearTanh, kIdentity, kScaleHalf, kLinear };
  struct EdgeSlot {
    std::uint32_t source;
    Op op;
    std::size_t weight = 0;  // block index; only for parametric ops
    std::size_t bias = 0;
  };
  struct CellLayout {
    std::vector<std::vector<EdgeSlot>> nodes;
    std::size_t merge_weight = 0;
    std::size_t merge_bias = 0;
  };
  struct CellCache {
    std::vector<Eigen::MatrixXd> nodes;
    std::vector<std::vector<Eigen::MatrixXd>> edge_out;
    Eigen::MatrixXd concat;
  };

  std::size_t add_block(std::size_t rows, std::size_t cols, bool bias,
                        std::size_t fan_in);
  Eigen::Map<const Eigen::MatrixXd> block(std::size_t b) const;
  Eigen::Map<Eigen::MatrixXd> grad_block(std::vector<double>& g,
                                         std::size_t b) const;
  std::pair<std::size_t, std::size_t> cell_inputs(std::size_t layer) const;
  Eigen::MatrixXd forward_cell(std::size_t layer, const Eigen::MatrixXd& in0,
                               const Eigen::MatrixXd& in1,
                               CellCache* cache) const;
  void backward_cell(std::size_t layer, const CellCache& cache,
                     const Eigen::MatrixXd& d_out, Eigen::MatrixXd& d_in0,
                     Eigen::MatrixXd& d_in1, std::vector<double>& grad) const;
  std::vector<Eigen::MatrixXd> forward_states(
      const Eigen::MatrixXd& x, std::vector<CellCache>* caches) const;

  SearchSpace space_;
  Architecture arch_;
  NetShape shape_;
  std::vector<ParameterBlock> blocks_;
  std::vector<double> theta_;
  std::size_t stem_weight_ = 0, stem_bias_ = 0;
  std::size_t head_weight_ = 0, head_bias_ = 0;
  std::vector<CellLayout> cells_;
};

}  // namespace nes

#endif  // NES_TOY_TOY_NETWORK_H_
