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

#ifndef NES_SEARCH_NES_H_
#define NES_SEARCH_NES_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "nes/search/coordinator.h"
#include "nes/search/evaluator.h"
#include "nes/search/tabular.h"
#include "nes/selection/ensemble_selection.h"

namespace nes {

struct SearchBudget {
  std::size_t K = 200;  // networks trained
  std::size_t M = 10;   // ensemble size
  std::size_t P = 50;   // population size
  std::size_t m = 10;   // parent candidates
  std::uint64_t seed = 0;

  // Throws ConfigError unless K >= M, P <= K and m <= P, all positive.
  void validate() const;
};

// Fixed-capacity FIFO of learner ids; the oldest member is at the front.
class Population {
 public:
  explicit Population(std::size_t capacity) : capacity_(capacity) {}

  // Appends `id` and evicts the oldest member when over capacity.
  std::optional<LearnerId> push(LearnerId id);

  std::size_t size() const { return members_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::vector<LearnerId> members() const {
    return {members_.begin(), members_.end()};
  }

 private:
  std::size_t capacity_;
  std::deque<LearnerId> members_;
};

// Which validation split drives parent selection during evolution.
enum class SeverityMix { kClean, kShifted, kAlternating };

// Shift severity used for the shifted validation split during evolution.
inline constexpr int kEvolutionShiftSeverity = 5;

enum class ExecutionMode {
  // Jobs run in waves merged by job index; bit-reproducible per seed.
  kSynchronous,
  // Workers pull new children as soon as any job finishes. Results depend on
  // completion order.
  kAsynchronous,
};

using MutationFn =
    std::function<Architecture(const SearchSpace&, const Architecture&, Rng&)>;

struct SearchOptions {
  std::size_t workers = 1;
  ExecutionMode mode = ExecutionMode::kSynchronous;
  // Defaults to nes::mutate.
  MutationFn mutation;
};

struct SearchResult {
  EnsembleSelection selection;
  Pool pool;
  // Final NES-RE population; empty for the other strategies.
  std::vector<LearnerId> population;
  std::size_t nets_trained = 0;
};

// Seed of training job `index` in a search seeded with `search_seed`.
std::uint64_t job_seed(std::uint64_t search_seed, std::size_t index);

// Samples K architectures uniformly with replacement, trains them and
// forward-selects M members on val@selection_severity.
SearchResult nes_rs(const Evaluator& evaluator, const SearchBudget& budget,
                    int selection_severity, const SearchOptions& options = {});

// Regularized evolution over a population of P networks. Each iteration
// forward-selects min(m, population) parent candidates on a validation split
// chosen by `mix`, mutates one uniformly drawn candidate and evicts the
// oldest population member. The final ensemble is forward-selected from the
// whole history on val@selection_severity.
SearchResult nes_re(const Evaluator& evaluator, const SearchBudget& budget,
                    SeverityMix mix, int selection_severity,
                    const SearchOptions& options = {});

// M independently seeded copies of `arch`, uniformly averaged.
SearchResult deep_ens_fixed(const Evaluator& evaluator,
                            const Architecture& arch, std::size_t m,
                            std::uint64_t seed,
                            const SearchOptions& options = {});

// Random search over K architectures (one seed each); the lowest validation
// NLL architecture is retrained with M fresh seeds.
SearchResult deep_ens_rs(const Evaluator& evaluator, std::size_t k,
                         std::size_t m, int selection_severity,
                         std::uint64_t seed, const SearchOptions& options = {});

// K seeds of `arch` followed by forward selection of M.
SearchResult deep_ens_plus_es(const Evaluator& evaluator,
                              const Architecture& arch, std::size_t k,
                              std::size_t m, int selection_severity,
                              std::uint64_t seed,
                              const SearchOptions& options = {});

// Architecture with the lowest seed-0 NLL on val@selection_severity across
// the whole table.
Architecture best_tabular_architecture(const TabularSource& source,
                                       int selection_severity);

// Deep ensemble of the stored seeds 0..M-1 of best_tabular_architecture.
SearchResult deep_ens_best_arch(const TabularSource& source, std::size_t m,
                                int selection_severity,
                                std::vector<SplitKey> keys = {});

}  // namespace nes

#endif  // NES_SEARCH_NES_H_
