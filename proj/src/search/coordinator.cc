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

#include "nes/search/coordinator.h"

#include <map>
#include <string>

#include "nes/error.h"

namespace nes {

TrainingCoordinator::TrainingCoordinator(const Evaluator& evaluator,
                                         std::size_t workers)
    : evaluator_(evaluator), worker_count_(workers == 0 ? 1 : workers) {
  if (worker_count_ > 1) {
    for (std::size_t w = 0; w < worker_count_; ++w) {
      threads_.emplace_back([this](std::stop_token st) { worker_loop(st); });
    }
  }
}

TrainingCoordinator::~TrainingCoordinator() {
  for (auto& t : threads_) t.request_stop();
  work_ready_.notify_all();
}

TrainingCoordinator::Outcome TrainingCoordinator::execute(
    TrainingJob job) const {
  Outcome out;
  try {
    out.network = evaluator_.train(job.arch, job.seed);
  } catch (...) {
    out.error = std::current_exception();
  }
  out.job = std::move(job);
  return out;
}

CompletedJob TrainingCoordinator::unwrap(Outcome outcome) const {
  if (outcome.error) {
    std::string what = "unknown error";
    try {
      std::rethrow_exception(outcome.error);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    throw TrainingError("training job " + std::to_string(outcome.job.index) +
                        " failed for architecture " +
                        outcome.job.arch.to_string(evaluator_.space()) +
                        " (seed " + std::to_string(outcome.job.seed) +
                        "): " + what);
  }
  return CompletedJob{std::move(outcome.job), std::move(outcome.network)};
}

void TrainingCoordinator::worker_loop(std::stop_token stop) {
  while (true) {
    TrainingJob job;
    {
      std::unique_lock lock(mutex_);
      if (!work_ready_.wait(lock, stop, [&] { return !queue_.empty(); })) {
        return;
      }
      job = std::move(queue_.front());
      queue_.pop_front();
    }
    Outcome outcome = execute(std::move(job));
    {
      std::lock_guard lock(mutex_);
      done_.push_back(std::move(outcome));
    }
    done_ready_.notify_one();
  }
}

void TrainingCoordinator::submit(TrainingJob job) {
  {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(job));
    ++in_flight_;
  }
  work_ready_.notify_one();
}

TrainingCoordinator::Outcome TrainingCoordinator::wait_outcome() {
  if (threads_.empty()) {
    TrainingJob job;
    {
      std::lock_guard lock(mutex_);
      if (queue_.empty()) throw std::logic_error("no job in flight");
      job = std::move(queue_.front());
      queue_.pop_front();
      --in_flight_;
    }
    return execute(std::move(job));
  }
  std::unique_lock lock(mutex_);
  if (in_flight_ == 0) throw std::logic_error("no job in flight");
  done_ready_.wait(lock, [&] { return !done_.empty(); });
  Outcome outcome = std::move(done_.front());
  done_.pop_front();
  --in_flight_;
  return outcome;
}

CompletedJob TrainingCoordinator::wait_next() {
  return unwrap(wait_outcome());
}

std::size_t TrainingCoordinator::in_flight() const {
  std::lock_guard lock(mutex_);
  return in_flight_;
}

std::vector<TrainedNetwork> TrainingCoordinator::run_wave(
    const std::vector<TrainingJob>& jobs) {
  std::vector<TrainedNetwork> results(jobs.size());
  if (threads_.empty()) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      results[i] = unwrap(execute(jobs[i])).network;
    }
    return results;
  }
  std::map<std::size_t, std::size_t> position;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    position[jobs[i].index] = i;
    submit(jobs[i]);
  }
  std::vector<Outcome> outcomes(jobs.size());
  for (std::size_t received = 0; received < jobs.size(); ++received) {
    Outcome outcome = wait_outcome();
    const std::size_t pos = position.at(outcome.job.index);
    outcomes[pos] = std::move(outcome);
  }
  // Unwrap in job order so the reported failure is the earliest job.
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    results[i] = unwrap(std::move(outcomes[i])).network;
  }
  return results;
}

}  // namespace nes
