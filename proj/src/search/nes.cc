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

#include "nes/search/nes.h"

#include <algorithm>
#include <limits>
#include <string>

#include "nes/core/metrics.h"
#include "nes/error.h"

namespace nes {
namespace {

enum Stream : std::uint64_t { kJobStream = 1, kSearchStream = 2, kEnsembleStream = 3 };

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool has_key(const Evaluator& evaluator, SplitKey key) {
  const auto keys = evaluator.split_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

void require_key(const Evaluator& evaluator, SplitKey key) {
  if (!has_key(evaluator, key)) {
    throw ConfigError("evaluator provides no " + to_string(key) +
                      " predictions");
  }
}

MutationFn resolve_mutation(const SearchOptions& options) {
  if (options.mutation) return options.mutation;
  return [](const SearchSpace& space, const Architecture& arch, Rng& rng) {
    return mutate(space, arch, rng);
  };
}

std::vector<TrainingJob> seed_jobs(const Architecture& arch, std::size_t count,
                                   std::uint64_t seed, std::size_t first_index) {
  // Consecutive seeds, so a table with S stored seeds per architecture
  // serves min(count, S) distinct ones.
  const std::uint64_t base = mix_seed({seed, kEnsembleStream});
  std::vector<TrainingJob> jobs;
  for (std::size_t i = 0; i < count; ++i) {
    jobs.push_back({first_index + i, arch, base + i});
  }
  return jobs;
}

EnsembleSelection uniform_selection(std::span<const LearnerId> ids) {
  EnsembleSelection s;
  s.member_ids.assign(ids.begin(), ids.end());
  return s;
}

}  // namespace

void SearchBudget::validate() const {
  if (K == 0 || M == 0 || P == 0 || m == 0) {
    throw ConfigError("search budget entries must be positive");
  }
  if (K < M) throw ConfigError("budget K must be >= ensemble size M");
  if (P > K) throw ConfigError("population size P must be <= K");
  if (m > P) throw ConfigError("parent candidate count m must be <= P");
}

std::optional<LearnerId> Population::push(LearnerId id) {
  members_.push_back(id);
  if (members_.size() <= capacity_) return std::nullopt;
  const LearnerId oldest = members_.front();
  members_.pop_front();
  return oldest;
}

std::uint64_t job_seed(std::uint64_t search_seed, std::size_t index) {
  return mix_seed({search_seed, kJobStream, index});
}

SearchResult nes_rs(const Evaluator& evaluator, const SearchBudget& budget,
                    int selection_severity, const SearchOptions& options) {
  if (budget.K < budget.M || budget.K == 0 || budget.M == 0) {
    throw ConfigError("NES-RS needs K >= M >= 1");
  }
  const SplitKey select_key = val_at(selection_severity);
  require_key(evaluator, select_key);

  Rng rng(mix_seed({budget.seed, kSearchStream}));
  std::vector<TrainingJob> jobs;
  for (std::size_t i = 0; i < budget.K; ++i) {
    jobs.push_back({i, sample_architecture(evaluator.space(), rng),
                    job_seed(budget.seed, i)});
  }
  TrainingCoordinator coordinator(evaluator, options.workers);
  SearchResult result;
  for (auto& network : coordinator.run_wave(jobs)) {
    result.pool.add(std::move(network));
  }
  result.nets_trained = budget.K;
  result.selection = forward_select(result.pool.view(select_key),
                                    evaluator.labels(select_key), budget.M);
  return result;
}

SearchResult nes_re(const Evaluator& evaluator, const SearchBudget& budget,
                    SeverityMix mix, int selection_severity,
                    const SearchOptions& options) {
  budget.validate();
  const SplitKey select_key = val_at(selection_severity);
  require_key(evaluator, select_key);
  require_key(evaluator, val_at(0));
  if (mix != SeverityMix::kClean) {
    require_key(evaluator, val_at(kEvolutionShiftSeverity));
  }
  const SearchSpace& space = evaluator.space();
  const MutationFn mutation = resolve_mutation(options);
  Rng rng(mix_seed({budget.seed, kSearchStream}));

  SearchResult result;
  Population population(budget.P);

  auto parent_key = [&]() {
    switch (mix) {
      case SeverityMix::kClean:
        return val_at(0);
      case SeverityMix::kShifted:
        return val_at(kEvolutionShiftSeverity);
      case SeverityMix::kAlternating:
        break;
    }
    return std::bernoulli_distribution(0.5)(rng) ? val_at(kEvolutionShiftSeverity)
                                                 : val_at(0);
  };
  auto make_child = [&]() {
    const SplitKey key = parent_key();
    const auto members = population.members();
    const std::size_t candidates = std::min(budget.m, members.size());
    const EnsembleSelection parents =
        forward_select(result.pool.view(key, members), evaluator.labels(key),
                       candidates);
    const LearnerId parent =
        parents.member_ids[uniform_index(rng, parents.member_ids.size())];
    return mutation(space, result.pool[parent].arch, rng);
  };
  auto admit = [&](TrainedNetwork network) {
    population.push(result.pool.add(std::move(network)));
  };

  TrainingCoordinator coordinator(evaluator, options.workers);
  if (options.mode == ExecutionMode::kSynchronous) {
    std::vector<TrainingJob> initial;
    for (std::size_t i = 0; i < budget.P; ++i) {
      initial.push_back({i, sample_architecture(space, rng),
                         job_seed(budget.seed, i)});
    }
    for (auto& network : coordinator.run_wave(initial)) admit(std::move(network));
    while (result.pool.size() < budget.K) {
      const std::size_t index = result.pool.size();
      TrainingJob job{index, make_child(), job_seed(budget.seed, index)};
      admit(std::move(coordinator.run_wave({job}).front()));
    }
  } else {
    std::size_t submitted = 0;
    while (result.pool.size() < budget.K) {
      while (submitted < budget.K &&
             coordinator.in_flight() < coordinator.workers()) {
        Architecture arch = (submitted < budget.P || population.size() == 0)
                                ? sample_architecture(space, rng)
                                : make_child();
        coordinator.submit(
            {submitted, std::move(arch), job_seed(budget.seed, submitted)});
        ++submitted;
      }
      admit(coordinator.wait_next().network);
    }
  }

  result.nets_trained = result.pool.size();
  result.population = population.members();
  result.selection = forward_select(result.pool.view(select_key),
                                    evaluator.labels(select_key), budget.M);
  return result;
}

SearchResult deep_ens_fixed(const Evaluator& evaluator,
                            const Architecture& arch, std::size_t m,
                            std::uint64_t seed, const SearchOptions& options) {
  if (m == 0) throw ConfigError("deep ensemble size must be >= 1");
  validate_architecture(evaluator.space(), arch);
  TrainingCoordinator coordinator(evaluator, options.workers);
  SearchResult result;
  for (auto& network : coordinator.run_wave(seed_jobs(arch, m, seed, 0))) {
    result.pool.add(std::move(network));
  }
  std::vector<LearnerId> ids;
  for (const auto& learner : result.pool.learners()) ids.push_back(learner.id);
  result.selection = uniform_selection(ids);
  result.nets_trained = m;
  return result;
}

SearchResult deep_ens_rs(const Evaluator& evaluator, std::size_t k,
                         std::size_t m, int selection_severity,
                         std::uint64_t seed, const SearchOptions& options) {
  if (k == 0 || m == 0) throw ConfigError("DeepEns (RS) needs K, M >= 1");
  const SplitKey select_key = val_at(selection_severity);
  require_key(evaluator, select_key);

  Rng rng(mix_seed({seed, kSearchStream}));
  std::vector<TrainingJob> jobs;
  for (std::size_t i = 0; i < k; ++i) {
    jobs.push_back({i, sample_architecture(evaluator.space(), rng),
                    job_seed(seed, i)});
  }
  TrainingCoordinator coordinator(evaluator, options.workers);
  SearchResult result;
  for (auto& network : coordinator.run_wave(jobs)) {
    result.pool.add(std::move(network));
  }
  const EnsembleSelection best = top_m(result.pool.view(select_key),
                                       evaluator.labels(select_key), 1);
  const Architecture winner = result.pool[best.member_ids.front()].arch;

  std::vector<LearnerId> ids;
  for (auto& network : coordinator.run_wave(seed_jobs(winner, m, seed, k))) {
    ids.push_back(result.pool.add(std::move(network)));
  }
  result.selection = uniform_selection(ids);
  result.nets_trained = k + m;
  return result;
}

SearchResult deep_ens_plus_es(const Evaluator& evaluator,
                              const Architecture& arch, std::size_t k,
                              std::size_t m, int selection_severity,
                              std::uint64_t seed,
                              const SearchOptions& options) {
  if (k < m || m == 0) throw ConfigError("DeepEns + ES needs K >= M >= 1");
  const SplitKey select_key = val_at(selection_severity);
  require_key(evaluator, select_key);
  SearchResult result = deep_ens_fixed(evaluator, arch, k, seed, options);
  result.selection = forward_select(result.pool.view(select_key),
                                    evaluator.labels(select_key), m);
  return result;
}

Architecture best_tabular_architecture(const TabularSource& source,
                                       int selection_severity) {
  const SplitKey key = val_at(selection_severity);
  const LabelVector& labels = source.labels(key);
  std::optional<Architecture> best;
  double best_nll = std::numeric_limits<double>::infinity();
  source.for_each_architecture([&](const Architecture& arch) {
    const double value = nll(source.predictions(arch, 0, key), labels);
    if (value < best_nll) {
      best_nll = value;
      best = arch;
    }
  });
  if (!best) throw DataError("tabular source holds no architectures");
  return *best;
}

SearchResult deep_ens_best_arch(const TabularSource& source, std::size_t m,
                                int selection_severity,
                                std::vector<SplitKey> keys) {
  if (m == 0) throw ConfigError("deep ensemble size must be >= 1");
  if (source.seeds_per_arch() < m) {
    throw DataError("table stores " + std::to_string(source.seeds_per_arch()) +
                    " seeds per architecture, " + std::to_string(m) +
                    " requested");
  }
  if (keys.empty()) keys = source.split_keys();
  const Architecture arch = best_tabular_architecture(source, selection_severity);
  SearchResult result;
  std::vector<LearnerId> ids;
  for (std::size_t s = 0; s < m; ++s) {
    TrainedNetwork network{arch, s, {}};
    for (SplitKey key : keys) {
      network.predictions.emplace(key, source.predictions(arch, s, key));
    }
    ids.push_back(result.pool.add(std::move(network)));
  }
  result.selection = uniform_selection(ids);
  result.nets_trained = m;
  return result;
}

}  // namespace nes
