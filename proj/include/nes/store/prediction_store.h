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

#ifndef NES_STORE_PREDICTION_STORE_H_
#define NES_STORE_PREDICTION_STORE_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nes/core/prediction_matrix.h"
#include "nes/search/evaluator.h"

namespace nes {

struct StoreKey {
  std::string arch;  // genome string
  std::uint64_t seed = 0;
  SplitKey split;
  friend auto operator<=>(const StoreKey&, const StoreKey&) = default;
};

struct ManifestEntry {
  StoreKey key;
  std::string file;  // relative to the store root
  std::uint32_t crc32 = 0;
  std::uint32_t num_points = 0;
  std::uint32_t num_classes = 0;
};

struct StoreManifest {
  std::string space_id;
  std::map<SplitKey, LabelVector> labels;
  std::vector<ManifestEntry> entries;  // insertion order

  std::string serialize() const;
  static StoreManifest deserialize(const std::string& text);
};

struct VerifyReport {
  std::size_t entries_checked = 0;
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

// Directory of immutable prediction matrices indexed by a text manifest.
//
//   <root>/MANIFEST            committed index, replaced atomically
//   <root>/matrices/NNNNNNNN.nesp
//
// A put writes its matrix files first and commits by renaming a new
// manifest over the old one, so a crash at any point leaves the previous
// committed state readable. Files not named by the manifest are removed on
// open. One writer; any number of readers.
class PredictionStore {
 public:
  enum class FaultPoint { kNone, kAfterMatrixWrite, kBeforeManifestRename };

  // Throws DataError if `root` already holds a manifest.
  static PredictionStore create(const std::filesystem::path& root,
                                std::string space_id);
  static PredictionStore open(const std::filesystem::path& root);
  // Opens if a manifest exists, creates otherwise.
  static PredictionStore open_or_create(const std::filesystem::path& root,
                                        std::string space_id);

  const std::filesystem::path& root() const { return root_; }
  const StoreManifest& manifest() const { return manifest_; }
  const std::string& space_id() const { return manifest_.space_id; }

  // Labels must be set for a split before matrices for it are added.
  // Setting identical labels again is a no-op; different labels throw.
  void set_labels(SplitKey key, const LabelVector& labels);
  const LabelVector& labels(SplitKey key) const;

  bool contains(const StoreKey& key) const { return index_.contains(key); }
  void put(const StoreKey& key, const PredictionMatrix& matrix);
  void put_batch(
      const std::vector<std::pair<StoreKey, PredictionMatrix>>& items);
  // Throws DataError on a missing key, checksum mismatch or bad contents.
  PredictionMatrix get(const StoreKey& key) const;

  VerifyReport verify() const;

  // Makes the next write abort with SimulatedCrash at `point`. Test hook.
  void inject_fault(FaultPoint point) { fault_ = point; }

 private:
  explicit PredictionStore(std::filesystem::path root);
  void commit(const StoreManifest& next);
  void collect_garbage();
  PredictionMatrix load(const ManifestEntry& entry) const;

  std::filesystem::path root_;
  StoreManifest manifest_;
  std::map<StoreKey, std::size_t> index_;
  std::size_t next_file_ = 0;
  FaultPoint fault_ = FaultPoint::kNone;
};

struct SimulatedCrash : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nes

#endif  // NES_STORE_PREDICTION_STORE_H_
