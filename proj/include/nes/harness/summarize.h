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

#ifndef NES_HARNESS_SUMMARIZE_H_
#define NES_HARNESS_SUMMARIZE_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nes/harness/experiment.h"

namespace nes {

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 1.96 standard errors; 0 for one sample
  std::size_t n = 0;
};

MeanCi mean_ci(std::span<const double> values);

struct SummaryCell {
  std::string method;
  std::string space;
  std::size_t K = 0;
  std::size_t M = 0;
  int severity = 0;
  std::string metric;
  MeanCi value;
};

extern const std::vector<std::string> kSummaryMetrics;

// Aggregates rows over seeds. Throws DataError when rows repeat a cell or
// methods disagree on the seed set or the (M, severity) grid.
std::vector<SummaryCell> summarize_rows(const std::vector<ResultRow>& rows);

std::vector<SelectionRecord> read_selections_csv(
    const std::filesystem::path& path);

// Validation NLL of consecutive K-grid entries for one (method, seed, M,
// severity).
struct KStep {
  std::string method;
  std::uint64_t seed = 0;
  std::size_t M = 0;
  int severity = 0;
  std::size_t K_from = 0;
  std::size_t K_to = 0;
  double val_from = 0.0;
  double val_to = 0.0;
  bool non_increasing() const { return val_to <= val_from; }
};

std::vector<KStep> validation_vs_K(const std::vector<SelectionRecord>& records);

struct SummaryOutput {
  std::vector<SummaryCell> cells;
  std::vector<KStep> k_steps;
  std::vector<std::filesystem::path> files;
};

// Reads results.csv (and selections.csv when present) from every run
// directory and writes summary.csv, per-axis series CSVs and SVG charts
// into `out_dir`.
SummaryOutput summarize(const std::vector<std::filesystem::path>& run_dirs,
                        const std::filesystem::path& out_dir);

}  // namespace nes

#endif  // NES_HARNESS_SUMMARIZE_H_
