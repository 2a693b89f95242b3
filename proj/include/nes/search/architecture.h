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

#ifndef NES_SEARCH_ARCHITECTURE_H_
#define NES_SEARCH_ARCHITECTURE_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace nes {

using Rng = std::mt19937_64;

// Order-sensitive mix of seed components (splitmix64 finalizer per step).
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

enum class CellKind {
  // Two input nodes; every intermediate node sums two edges from distinct
  // earlier nodes. Mutations may rewire edges.
  kMlpCell,
  // One input node; node j receives an edge from every earlier node, so only
  // the per-edge operations vary.
  kTabularCell,
};

// The five vector operations understood by the toy trainer.
const std::vector<std::string>& default_op_names();

class SearchSpace {
 public:
  // `intermediate_nodes` nodes after the two inputs.
  static SearchSpace mlp_cell(std::size_t intermediate_nodes = 4,
                              std::vector<std::string> ops = default_op_names());
  // `nodes` counts the input node as well.
  static SearchSpace tabular_cell(std::size_t nodes = 4,
                                  std::vector<std::string> ops = default_op_names());
  // Inverse of id().
  static SearchSpace parse(std::string_view id);

  CellKind kind() const { return kind_; }
  const std::vector<std::string>& ops() const { return ops_; }
  std::size_t num_ops() const { return ops_.size(); }
  std::size_t num_input_nodes() const {
    return kind_ == CellKind::kMlpCell ? 2 : 1;
  }
  // Nodes that receive edges.
  std::size_t num_computed_nodes() const { return computed_nodes_; }
  std::size_t num_nodes() const { return num_input_nodes() + computed_nodes_; }
  // Incoming edge count of the computed node with full index `node`.
  std::size_t in_degree(std::size_t node) const {
    return kind_ == CellKind::kMlpCell ? 2 : node;
  }
  std::size_t num_edges() const;
  // Number of distinct canonical genomes (saturates at UINT64_MAX).
  std::uint64_t size() const;
  std::uint32_t op_index(std::string_view name) const;

  // "mlp-cell:4:op,op,..." or "tabular-cell:4:op,op,...".
  std::string id() const;

  friend bool operator==(const SearchSpace&, const SearchSpace&) = default;

 private:
  SearchSpace(CellKind kind, std::size_t computed_nodes,
              std::vector<std::string> ops);

  CellKind kind_;
  std::size_t computed_nodes_;
  std::vector<std::string> ops_;
};

struct Edge {
  std::uint32_t source = 0;
  std::uint32_t op = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Cell genome: for every computed node, its incoming edges sorted by
// (source, op). Computed node j has full node index num_input_nodes() + j.
class Architecture {
 public:
  Architecture() = default;
  explicit Architecture(std::vector<std::vector<Edge>> nodes);

  const std::vector<std::vector<Edge>>& nodes() const { return nodes_; }
  std::size_t num_edges() const;

  // Text form "|op~src|op~src|+|op~src|...|", one '+'-separated group per
  // computed node (the NAS-Bench-201 arch-string layout).
  std::string to_string(const SearchSpace& space) const;
  static Architecture parse(const SearchSpace& space, std::string_view text);

  friend auto operator<=>(const Architecture&, const Architecture&) = default;

 private:
  std::vector<std::vector<Edge>> nodes_;
};

// Throws std::invalid_argument unless `arch` is a canonical genome of `space`.
void validate_architecture(const SearchSpace& space, const Architecture& arch);

// Uniform over canonical genomes.
Architecture sample_architecture(const SearchSpace& space, Rng& rng);

// Every genome of the space in a fixed order. Refuses spaces above `limit`.
std::vector<Architecture> enumerate_architectures(const SearchSpace& space,
                                                  std::uint64_t limit = 1u << 22);

enum class MutationKind { kIdentity, kOp, kHiddenState };

// Applies one mutation drawn uniformly from the kinds the space allows
// (tabular cells: op mutation only). Infeasible kinds are resampled; the
// result is always a valid genome.
Architecture mutate(const SearchSpace& space, const Architecture& arch,
                    Rng& rng, MutationKind* applied = nullptr);

// Applies exactly `kind`; returns false (leaving `arch` untouched) if the
// genome admits no such mutation.
bool apply_mutation(const SearchSpace& space, Architecture& arch,
                    MutationKind kind, Rng& rng);

}  // namespace nes

#endif  // NES_SEARCH_ARCHITECTURE_H_
