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

#include "nes/search/architecture.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nes {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

const char* kind_name(CellKind kind) {
  return kind == CellKind::kMlpCell ? "mlp-cell" : "tabular-cell";
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

const std::vector<std::string>& default_op_names() {
  static const std::vector<std::string> kOps = {
      "linear_relu", "linear_tanh", "identity", "scale_half", "linear"};
  return kOps;
}

SearchSpace::SearchSpace(CellKind kind, std::size_t computed_nodes,
                         std::vector<std::string> ops)
    : kind_(kind), computed_nodes_(computed_nodes), ops_(std::move(ops)) {
  if (computed_nodes_ < 1) {
    throw std::invalid_argument("search space needs at least one computed node");
  }
  if (ops_.empty()) throw std::invalid_argument("empty operation set");
  for (const auto& op : ops_) {
    if (op.empty() || op.find_first_of("|~+:, \t\n") != std::string::npos) {
      throw std::invalid_argument("invalid operation name '" + op + "'");
    }
  }
  auto sorted = ops_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("duplicate operation name");
  }
}

SearchSpace SearchSpace::mlp_cell(std::size_t intermediate_nodes,
                                  std::vector<std::string> ops) {
  return SearchSpace(CellKind::kMlpCell, intermediate_nodes, std::move(ops));
}

SearchSpace SearchSpace::tabular_cell(std::size_t nodes,
                                      std::vector<std::string> ops) {
  if (nodes < 2) throw std::invalid_argument("tabular cell needs >= 2 nodes");
  return SearchSpace(CellKind::kTabularCell, nodes - 1, std::move(ops));
}

SearchSpace SearchSpace::parse(std::string_view id) {
  const auto parts = split(id, ':');
  if (parts.size() != 3) {
    throw std::invalid_argument("malformed search space id '" +
                                std::string(id) + "'");
  }
  std::size_t nodes = 0;
  try {
    nodes = std::stoul(std::string(parts[1]));
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed node count in '" + std::string(id) +
                                "'");
  }
  std::vector<std::string> ops;
  for (auto op : split(parts[2], ',')) ops.emplace_back(op);
  if (parts[0] == "mlp-cell") return mlp_cell(nodes, std::move(ops));
  if (parts[0] == "tabular-cell") return tabular_cell(nodes, std::move(ops));
  throw std::invalid_argument("unknown cell kind '" + std::string(parts[0]) +
                              "'");
}

std::size_t SearchSpace::num_edges() const {
  std::size_t total = 0;
  for (std::size_t j = 0; j < computed_nodes_; ++j) {
    total += in_degree(num_input_nodes() + j);
  }
  return total;
}

std::uint64_t SearchSpace::size() const {
  std::uint64_t total = 1;
  const std::uint64_t ops = ops_.size();
  for (std::size_t j = 0; j < computed_nodes_; ++j) {
    const std::uint64_t node = num_input_nodes() + j;
    if (kind_ == CellKind::kMlpCell) {
      total = saturating_mul(total, node * (node - 1) / 2);
      total = saturating_mul(total, ops * ops);
    } else {
      for (std::uint64_t e = 0; e < node; ++e) total = saturating_mul(total, ops);
    }
  }
  return total;
}

std::uint32_t SearchSpace::op_index(std::string_view name) const {
  auto it = std::find(ops_.begin(), ops_.end(), name);
  if (it == ops_.end()) {
    throw std::invalid_argument("operation '" + std::string(name) +
                                "' not in search space");
  }
  return static_cast<std::uint32_t>(it - ops_.begin());
}

std::string SearchSpace::id() const {
  std::string out = kind_name(kind_);
  out += ':';
  out += std::to_string(kind_ == CellKind::kMlpCell ? computed_nodes_
                                                    : computed_nodes_ + 1);
  out += ':';
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    if (i) out += ',';
    out += ops_[i];
  }
  return out;
}

Architecture::Architecture(std::vector<std::vector<Edge>> nodes)
    : nodes_(std::move(nodes)) {
  for (auto& edges : nodes_) std::sort(edges.begin(), edges.end());
}

std::size_t Architecture::num_edges() const {
  std::size_t total = 0;
  for (const auto& edges : nodes_) total += edges.size();
  return total;
}

std::string Architecture::to_string(const SearchSpace& space) const {
  std::string out;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    if (j) out += '+';
    out += '|';
    for (const Edge& e : nodes_[j]) {
      out += space.ops().at(e.op);
      out += '~';
      out += std::to_string(e.source);
      out += '|';
    }
  }
  return out;
}

Architecture Architecture::parse(const SearchSpace& space,
                                 std::string_view text) {
  std::vector<std::vector<Edge>> nodes;
  for (auto group : split(text, '+')) {
    if (group.size() < 2 || group.front() != '|' || group.back() != '|') {
      throw std::invalid_argument("malformed genome group '" +
                                  std::string(group) + "'");
    }
    std::vector<Edge> edges;
    for (auto token : split(group.substr(1, group.size() - 2), '|')) {
      const auto tilde = token.find('~');
      if (tilde == std::string_view::npos) {
        throw std::invalid_argument("malformed edge '" + std::string(token) +
                                    "'");
      }
      Edge e;
      e.op = space.op_index(token.substr(0, tilde));
      try {
        e.source = static_cast<std::uint32_t>(
            std::stoul(std::string(token.substr(tilde + 1))));
      } catch (const std::exception&) {
        throw std::invalid_argument("malformed edge source in '" +
                                    std::string(token) + "'");
      }
      edges.push_back(e);
    }
    nodes.push_back(std::move(edges));
  }
  Architecture arch(std::move(nodes));
  validate_architecture(space, arch);
  return arch;
}

void validate_architecture(const SearchSpace& space, const Architecture& arch) {
  const auto& nodes = arch.nodes();
  if (nodes.size() != space.num_computed_nodes()) {
    throw std::invalid_argument("genome has " + std::to_string(nodes.size()) +
                                " computed nodes, space expects " +
                                std::to_string(space.num_computed_nodes()));
  }
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const std::size_t node = space.num_input_nodes() + j;
    const auto& edges = nodes[j];
    if (edges.size() != space.in_degree(node)) {
      throw std::invalid_argument("node " + std::to_string(node) +
                                  " has wrong in-degree");
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edges[e].source >= node) {
        throw std::invalid_argument("edge into node " + std::to_string(node) +
                                    " does not come from an earlier node");
      }
      if (edges[e].op >= space.num_ops()) {
        throw std::invalid_argument("edge operation out of range");
      }
      if (e > 0 && edges[e - 1].source >= edges[e].source) {
        throw std::invalid_argument("node " + std::to_string(node) +
                                    " has repeated or unsorted sources");
      }
    }
  }
}

Architecture sample_architecture(const SearchSpace& space, Rng& rng) {
  std::vector<std::vector<Edge>> nodes;
  for (std::size_t j = 0; j < space.num_computed_nodes(); ++j) {
    const std::size_t node = space.num_input_nodes() + j;
    std::vector<Edge> edges;
    if (space.kind() == CellKind::kMlpCell) {
      const auto a = uniform_index(rng, node);
      auto b = uniform_index(rng, node - 1);
      if (b >= a) ++b;
      edges.push_back({static_cast<std::uint32_t>(a), 0});
      edges.push_back({static_cast<std::uint32_t>(b), 0});
    } else {
      for (std::size_t s = 0; s < node; ++s) {
        edges.push_back({static_cast<std::uint32_t>(s), 0});
      }
    }
    for (Edge& e : edges) {
      e.op = static_cast<std::uint32_t>(uniform_index(rng, space.num_ops()));
    }
    nodes.push_back(std::move(edges));
  }
  return Architecture(std::move(nodes));
}

std::vector<Architecture> enumerate_architectures(const SearchSpace& space,
                                                  std::uint64_t limit) {
  if (space.size() > limit) {
    throw std::invalid_argument("search space too large to enumerate");
  }
  // Per-node option lists, then a mixed-radix sweep over them.
  std::vector<std::vector<std::vector<Edge>>> options;
  const std::uint32_t ops = static_cast<std::uint32_t>(space.num_ops());
  for (std::size_t j = 0; j < space.num_computed_nodes(); ++j) {
    const auto node = static_cast<std::uint32_t>(space.num_input_nodes() + j);
    std::vector<std::vector<Edge>> node_options;
    if (space.kind() == CellKind::kMlpCell) {
      for (std::uint32_t a = 0; a < node; ++a) {
        for (std::uint32_t b = a + 1; b < node; ++b) {
          for (std::uint32_t oa = 0; oa < ops; ++oa) {
            for (std::uint32_t ob = 0; ob < ops; ++ob) {
              node_options.push_back({{a, oa}, {b, ob}});
            }
          }
        }
      }
    } else {
      std::vector<std::uint32_t> digits(node, 0);
      while (true) {
        std::vector<Edge> edges;
        for (std::uint32_t s = 0; s < node; ++s) edges.push_back({s, digits[s]});
        node_options.push_back(std::move(edges));
        std::size_t pos = 0;
        while (pos < node && ++digits[pos] == ops) digits[pos++] = 0;
        if (pos == node) break;
      }
    }
    options.push_back(std::move(node_options));
  }

  std::vector<Architecture> out;
  out.reserve(space.size());
  std::vector<std::size_t> index(options.size(), 0);
  while (true) {
    std::vector<std::vector<Edge>> nodes;
    for (std::size_t j = 0; j < options.size(); ++j) {
      nodes.push_back(options[j][index[j]]);
    }
    out.emplace_back(std::move(nodes));
    std::size_t pos = 0;
    while (pos < index.size() && ++index[pos] == options[pos].size()) {
      index[pos++] = 0;
    }
    if (pos == index.size()) break;
  }
  return out;
}

bool apply_mutation(const SearchSpace& space, Architecture& arch,
                    MutationKind kind, Rng& rng) {
  if (kind == MutationKind::kIdentity) return true;
  auto nodes = arch.nodes();

  if (kind == MutationKind::kOp) {
    if (space.num_ops() < 2) return false;
    std::size_t flat = uniform_index(rng, arch.num_edges());
    for (auto& edges : nodes) {
      if (flat < edges.size()) {
        Edge& e = edges[flat];
        auto op = uniform_index(rng, space.num_ops() - 1);
        if (op >= e.op) ++op;
        e.op = static_cast<std::uint32_t>(op);
        break;
      }
      flat -= edges.size();
    }
    arch = Architecture(std::move(nodes));
    return true;
  }

  // Hidden-state mutation rewires one edge of one node to another earlier
  // node that the node does not already read from.
  if (space.kind() != CellKind::kMlpCell) return false;
  std::vector<std::size_t> eligible;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (space.num_input_nodes() + j > nodes[j].size()) eligible.push_back(j);
  }
  if (eligible.empty()) return false;
  const std::size_t j = eligible[uniform_index(rng, eligible.size())];
  const std::size_t node = space.num_input_nodes() + j;
  auto& edges = nodes[j];
  Edge& target = edges[uniform_index(rng, edges.size())];
  std::vector<std::uint32_t> free_sources;
  for (std::uint32_t s = 0; s < node; ++s) {
    const bool used = std::any_of(edges.begin(), edges.end(),
                                  [&](const Edge& e) { return e.source == s; });
    if (!used) free_sources.push_back(s);
  }
  target.source = free_sources[uniform_index(rng, free_sources.size())];
  arch = Architecture(std::move(nodes));
  return true;
}

Architecture mutate(const SearchSpace& space, const Architecture& arch,
                    Rng& rng, MutationKind* applied) {
  std::vector<MutationKind> kinds;
  if (space.kind() == CellKind::kTabularCell) {
    kinds = {MutationKind::kOp};
  } else {
    kinds = {MutationKind::kIdentity, MutationKind::kOp,
             MutationKind::kHiddenState};
  }
  Architecture child = arch;
  while (!kinds.empty()) {
    const std::size_t pick = uniform_index(rng, kinds.size());
    if (apply_mutation(space, child, kinds[pick], rng)) {
      if (applied) *applied = kinds[pick];
      return child;
    }
    kinds.erase(kinds.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  if (applied) *applied = MutationKind::kIdentity;
  return child;
}

}  // namespace nes
