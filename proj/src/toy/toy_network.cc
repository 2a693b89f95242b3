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

#include "nes/toy/toy_network.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "nes/error.h"

namespace nes {

void NetShape::validate() const {
  if (input_dim == 0 || hidden_width == 0 || macro_depth == 0) {
    throw ConfigError("network widths and depth must be >= 1");
  }
  if (num_classes < 2) throw ConfigError("network needs at least 2 classes");
}

ToyNetwork::ToyNetwork(SearchSpace space, Architecture arch, NetShape shape)
    : space_(std::move(space)), arch_(std::move(arch)), shape_(shape) {
  shape_.validate();
  validate_architecture(space_, arch_);
  std::vector<Op> ops;
  for (const auto& name : space_.ops()) {
    if (name == "linear_relu") ops.push_back(Op::kLinearRelu);
    else if (name == "linear_tanh") ops.push_back(Op::kLinearTanh);
    else if (name == "identity") ops.push_back(Op::kIdentity);
    else if (name == "scale_half") ops.push_back(Op::kScaleHalf);
    else if (name == "linear") ops.push_back(Op::kLinear);
    else throw std::invalid_argument("toy network has no operation '" + name + "'");
  }
  const std::size_t h = shape_.hidden_width;
  stem_weight_ = add_block(h, shape_.input_dim, false, shape_.input_dim);
  stem_bias_ = add_block(h, 1, true, 0);
  for (std::size_t l = 0; l < shape_.macro_depth; ++l) {
    CellLayout cell;
    for (const auto& node : arch_.nodes()) {
      std::vector<EdgeSlot> slots;
      for (const auto& e : node) {
        EdgeSlot slot{e.source, ops[e.op]};
        if (slot.op == Op::kLinearRelu || slot.op == Op::kLinearTanh ||
            slot.op == Op::kLinear) {
          slot.weight = add_block(h, h, false, h);
          slot.bias = add_block(h, 1, true, 0);
        }
        slots.push_back(slot);
      }
      cell.nodes.push_back(std::move(slots));
    }
    if (space_.kind() == CellKind::kMlpCell) {
      const std::size_t width = h * arch_.nodes().size();
      cell.merge_weight = add_block(h, width, false, width);
      cell.merge_bias = add_block(h, 1, true, 0);
    }
    cells_.push_back(std::move(cell));
  }
  head_weight_ = add_block(shape_.num_classes, h, false, h);
  head_bias_ = add_block(shape_.num_classes, 1, true, 0);
  theta_.assign(theta_.size(), 0.0);
}

std::size_t ToyNetwork::add_block(std::size_t rows, std::size_t cols, bool bias,
                                  std::size_t fan_in) {
  ParameterBlock b{theta_.size(), rows, cols, bias,
                   bias ? 0.0 : 1.0 / static_cast<double>(fan_in)};
  theta_.resize(theta_.size() + rows * cols);
  blocks_.push_back(b);
  return blocks_.size() - 1;
}

Eigen::Map<const Eigen::MatrixXd> ToyNetwork::block(std::size_t b) const {
  const auto& pb = blocks_[b];
  return {theta_.data() + pb.offset, static_cast<Eigen::Index>(pb.rows),
          static_cast<Eigen::Index>(pb.cols)};
}

Eigen::Map<Eigen::MatrixXd> ToyNetwork::grad_block(std::vector<double>& g,
                                                   std::size_t b) const {
  const auto& pb = blocks_[b];
  return {g.data() + pb.offset, static_cast<Eigen::Index>(pb.rows),
          static_cast<Eigen::Index>(pb.cols)};
}

std::vector<double> ToyNetwork::sample_initialization(Rng& rng) const {
  std::vector<double> theta(theta_.size(), 0.0);
  std::normal_distribution<double> normal;
  for (const auto& b : blocks_) {
    if (b.bias) continue;
    const double sd = std::sqrt(b.init_variance);
    for (std::size_t k = 0; k < b.rows * b.cols; ++k) {
      theta[b.offset + k] = sd * normal(rng);
    }
  }
  return theta;
}

std::pair<std::size_t, std::size_t> ToyNetwork::cell_inputs(
    std::size_t layer) const {
  if (space_.kind() == CellKind::kTabularCell) return {layer, layer};
  return {layer == 0 ? 0 : layer - 1, layer};
}

Eigen::MatrixXd ToyNetwork::forward_cell(std::size_t layer,
                                         const Eigen::MatrixXd& in0,
                                         const Eigen::MatrixXd& in1,
                                         CellCache* cache) const {
  const CellLayout& cell = cells_[layer];
  std::vector<Eigen::MatrixXd> nodes;
  nodes.push_back(in0);
  if (space_.kind() == CellKind::kMlpCell) nodes.push_back(in1);
  std::vector<std::vector<Eigen::MatrixXd>> edge_out(cell.nodes.size());
  for (std::size_t j = 0; j < cell.nodes.size(); ++j) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(in0.rows(), in0.cols());
    for (const auto& e : cell.nodes[j]) {
      const Eigen::MatrixXd& src = nodes[e.source];
      Eigen::MatrixXd out;
      switch (e.op) {
        case Op::kIdentity:
          out = src;
          break;
        case Op::kScaleHalf:
          out = 0.5 * src;
          break;
        default: {
          Eigen::MatrixXd pre = block(e.weight) * src;
          pre.colwise() += block(e.bias).col(0);
          if (e.op == Op::kLinearRelu) out = pre.cwiseMax(0.0);
          else if (e.op == Op::kLinearTanh) out = pre.array().tanh().matrix();
          else out = std::move(pre);
        }
      }
      sum += out;
      edge_out[j].push_back(std::move(out));
    }
    nodes.push_back(std::move(sum));
  }
  Eigen::MatrixXd result;
  Eigen::MatrixXd concat;
  if (space_.kind() == CellKind::kMlpCell) {
    const Eigen::Index h = in0.rows();
    concat.resize(h * static_cast<Eigen::Index>(cell.nodes.size()), in0.cols());
    for (std::size_t j = 0; j < cell.nodes.size(); ++j) {
      concat.middleRows(static_cast<Eigen::Index>(j) * h, h) =
          nodes[space_.num_input_nodes() + j];
    }
    result = block(cell.merge_weight) * concat;
    result.colwise() += block(cell.merge_bias).col(0);
  } else {
    result = nodes.back();
  }
  if (cache) {
    cache->nodes = std::move(nodes);
    cache->edge_out = std::move(edge_out);
    cache->concat = std::move(concat);
  }
  return result;
}

void ToyNetwork::backward_cell(std::size_t layer, const CellCache& cache,
                               const Eigen::MatrixXd& d_out,
                               Eigen::MatrixXd& d_in0, Eigen::MatrixXd& d_in1,
                               std::vector<double>& grad) const {
  const CellLayout& cell = cells_[layer];
  const std::size_t inputs = space_.num_input_nodes();
  std::vector<Eigen::MatrixXd> d_nodes(
      cache.nodes.size(), Eigen::MatrixXd::Zero(d_out.rows(), d_out.cols()));
  if (space_.kind() == CellKind::kMlpCell) {
    grad_block(grad, cell.merge_weight) += d_out * cache.concat.transpose();
    grad_block(grad, cell.merge_bias) += d_out.rowwise().sum();
    const Eigen::MatrixXd d_concat = block(cell.merge_weight).transpose() * d_out;
    const Eigen::Index h = d_out.rows();
    for (std::size_t j = 0; j < cell.nodes.size(); ++j) {
      d_nodes[inputs + j] = d_concat.middleRows(static_cast<Eigen::Index>(j) * h, h);
    }
  } else {
    d_nodes.back() = d_out;
  }
  for (std::size_t j = cell.nodes.size(); j-- > 0;) {
    const Eigen::MatrixXd& d = d_nodes[inputs + j];
    for (std::size_t k = 0; k < cell.nodes[j].size(); ++k) {
      const EdgeSlot& e = cell.nodes[j][k];
      const Eigen::MatrixXd& out = cache.edge_out[j][k];
      Eigen::MatrixXd d_pre;
      switch (e.op) {
        case Op::kIdentity:
          d_nodes[e.source] += d;
          continue;
        case Op::kScaleHalf:
          d_nodes[e.source] += 0.5 * d;
          continue;
        case Op::kLinearRelu:
          d_pre = (out.array() > 0.0).select(d, 0.0);
          break;
        case Op::kLinearTanh:
          d_pre = d.cwiseProduct((1.0 - out.array().square()).matrix());
          break;
        case Op::kLinear:
          d_pre = d;
          break;
      }
      grad_block(grad, e.weight) += d_pre * cache.nodes[e.source].transpose();
      grad_block(grad, e.bias) += d_pre.rowwise().sum();
      d_nodes[e.source] += block(e.weight).transpose() * d_pre;
    }
  }
  d_in0 += d_nodes[0];
  if (space_.kind() == CellKind::kMlpCell) d_in1 += d_nodes[1];
}

std::vector<Eigen::MatrixXd> ToyNetwork::forward_states(
    const Eigen::MatrixXd& x, std::vector<CellCache>* caches) const {
  std::vector<Eigen::MatrixXd> states;
  states.push_back(stem(x));
  if (caches) caches->resize(cells_.size());
  for (std::size_t l = 0; l < cells_.size(); ++l) {
    const auto [a, b] = cell_inputs(l);
    states.push_back(forward_cell(l, states[a], states[b],
                                  caches ? &(*caches)[l] : nullptr));
  }
  return states;
}

Eigen::MatrixXd ToyNetwork::stem(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.rows()) != shape_.input_dim) {
    throw std::invalid_argument("input dimension mismatch");
  }
  Eigen::MatrixXd s = block(stem_weight_) * x;
  s.colwise() += block(stem_bias_).col(0);
  return s;
}

Eigen::MatrixXd ToyNetwork::features(const Eigen::MatrixXd& x) const {
  return forward_states(x, nullptr).back();
}

Eigen::MatrixXd ToyNetwork::logits(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd z = block(head_weight_) * features(x);
  z.colwise() += block(head_bias_).col(0);
  return z;
}

PredictionMatrix ToyNetwork::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd z = logits(x);
  // Column-major C x N is row-major N x C.
  return PredictionMatrix::from_logits(
      static_cast<std::size_t>(z.cols()), static_cast<std::size_t>(z.rows()),
      std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
}

double ToyNetwork::penalty(const Regularizer& reg) const {
  const bool anchored = !reg.anchor.empty();
  if (anchored && reg.anchor.size() != theta_.size()) {
    throw std::invalid_argument("anchor size differs from parameter count");
  }
  double total = 0.0;
  for (const auto& b : blocks_) {
    if (b.bias) continue;
    for (std::size_t k = b.offset; k < b.offset + b.rows * b.cols; ++k) {
      total += 0.5 * reg.l2 * theta_[k] * theta_[k];
      if (anchored) {
        const double diff = theta_[k] - reg.anchor[k];
        total += reg.anchor_lambda / static_cast<double>(reg.num_train) *
                 diff * diff / (2.0 * b.init_variance);
      }
    }
  }
  return total;
}

double ToyNetwork::loss(const Eigen::MatrixXd& x,
                        std::span<const std::uint32_t> labels,
                        const Regularizer& reg,
                        std::vector<double>* grad) const {
  const auto batch = static_cast<std::size_t>(x.cols());
  if (labels.size() != batch || batch == 0) {
    throw std::invalid_argument("labels must match the batch size");
  }
  std::vector<CellCache> caches;
  const auto states = forward_states(x, grad ? &caches : nullptr);
  Eigen::MatrixXd z = block(head_weight_) * states.back();
  z.colwise() += block(head_bias_).col(0);

  double data_loss = 0.0;
  Eigen::MatrixXd d_z(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    const double shift = z.col(i).maxCoeff();
    const Eigen::VectorXd e = (z.col(i).array() - shift).exp();
    const double norm = e.sum();
    const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
    data_loss -= z(y, i) - shift - std::log(norm);
    d_z.col(i) = e / norm;
    d_z(y, i) -= 1.0;
  }
  data_loss /= static_cast<double>(batch);
  const double total = data_loss + penalty(reg);
  if (!grad) return total;

  grad->assign(theta_.size(), 0.0);
  d_z /= static_cast<double>(batch);
  grad_block(*grad, head_weight_) += d_z * states.back().transpose();
  grad_block(*grad, head_bias_) += d_z.rowwise().sum();
  std::vector<Eigen::MatrixXd> d_states(
      states.size(), Eigen::MatrixXd::Zero(states[0].rows(), states[0].cols()));
  d_states.back() = block(head_weight_).transpose() * d_z;
  for (std::size_t l = cells_.size(); l-- > 0;) {
    const auto [a, b] = cell_inputs(l);
    Eigen::MatrixXd d_a = Eigen::MatrixXd::Zero(states[0].rows(),
                                                states[0].cols());
    Eigen::MatrixXd d_b = d_a;
    backward_cell(l, caches[l], d_states[l + 1], d_a, d_b, *grad);
    d_states[a] += d_a;
    if (space_.kind() == CellKind::kMlpCell) d_states[b] += d_b;
  }
  grad_block(*grad, stem_weight_) += d_states[0] * x.transpose();
  grad_block(*grad, stem_bias_) += d_states[0].rowwise().sum();

  const bool anchored = !reg.anchor.empty();
  for (const auto& blk : blocks_) {
    if (blk.bias) continue;
    for (std::size_t k = blk.offset; k < blk.offset + blk.rows * blk.cols; ++k) {
      (*grad)[k] += reg.l2 * theta_[k];
      if (anchored) {
        (*grad)[k] += reg.anchor_lambda / static_cast<double>(reg.num_train) *
                      (theta_[k] - reg.anchor[k]) / blk.init_variance;
      }
    }
  }
  return total;
}

}  // namespace nes
