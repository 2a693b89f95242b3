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

#ifndef NES_SEARCH_COORDINATOR_H_
#define NES_SEARCH_COORDINATOR_H_

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "nes/search/evaluator.h"

namespace nes {

struct TrainingJob {
  std::size_t index = 0;
  Architecture arch;
  std::uint64_t seed = 0;
};

struct CompletedJob {
  TrainingJob job;
  TrainedNetwork network;
};

// Dispatches training jobs to a fixed set of worker threads. The owner of the
// coordinator keeps all search state; workers only see job descriptions and
// hand back predictions. With one worker every job runs inline on the calling
// thread.
class TrainingCoordinator {
 public:
  TrainingCoordinator(const Evaluator& evaluator, std::size_t workers);
  ~TrainingCoordinator();

  TrainingCoordinator(const TrainingCoordinator&) = delete;
  TrainingCoordinator& operator=(const TrainingCoordinator&) = delete;

  // Trains every job and returns networks aligned with `jobs`, independent
  // of completion order. Throws TrainingError naming the first failed job.
  std::vector<TrainedNetwork> run_wave(const std::vector<TrainingJob>& jobs);

  void submit(TrainingJob job);
  // Blocks until some submitted job finishes; returns jobs in completion
  // order.
  CompletedJob wait_next();
  std::size_t in_flight() const;

  std::size_t workers() const { return worker_count_; }

 private:
  struct Outcome {
    TrainingJob job;
    TrainedNetwork network;
    std::exception_ptr error;
  };

  Outcome execute(TrainingJob job) const;
  Outcome wait_outcome();
  CompletedJob unwrap(Outcome outcome) const;
  void worker_loop(std::stop_token stop);

  const Evaluator& evaluator_;
  std::size_t worker_count_;

  mutable std::mutex mutex_;
  std::condition_variable_any work_ready_;
  std::condition_variable done_ready_;
  std::deque<TrainingJob> queue_;
  std::deque<Outcome> done_;
  std::size_t in_flight_ = 0;
  std::vector<std::jthread> threads_;
};

}  // namespace nes

#endif  // NES_SEARCH_COORDINATOR_H_
