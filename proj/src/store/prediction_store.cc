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

#include "nes/store/prediction_store.h"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "nes/error.h"
#include "nes/store/matrix_file.h"

namespace nes {
namespace fs = std::filesystem;
namespace {

constexpr char kManifestName[] = "MANIFEST";
constexpr char kMatrixDir[] = "matrices";
constexpr char kManifestHeader[] = "nes-prediction-store 1";

std::string hex32(std::uint32_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(8) << std::setfill('0') << v;
  return os.str();
}

std::string matrix_file_name(std::size_t n) {
  std::ostringstream os;
  os << kMatrixDir << '/' << std::setw(8) << std::setfill('0') << n << ".nesp";
  return os.str();
}

}  // namespace

std::string StoreManifest::serialize() const {
  std::ostringstream os;
  os << kManifestHeader << '\n' << "space " << space_id << '\n';
  for (const auto& [key, y] : labels) {
    os << "labels " << to_string(key) << ' ' << y.size();
    for (auto v : y.values()) os << ' ' << v;
    os << '\n';
  }
  for (const auto& e : entries) {
    os << "entry " << to_string(e.key.split) << ' ' << e.key.seed << ' '
       << e.num_points << ' ' << e.num_classes << ' ' << hex32(e.crc32) << ' '
       << e.file << ' ' << e.key.arch << '\n';
  }
  return os.str();
}

StoreManifest StoreManifest::deserialize(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kManifestHeader) {
    throw DataError("manifest header missing or unsupported");
  }
  StoreManifest m;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    auto fail = [&](const std::string& what) {
      return DataError("manifest line " + std::to_string(line_no) + ": " +
                       what);
    };
    if (tag == "space") {
      ls >> m.space_id;
    } else if (tag == "labels") {
      std::string key;
      std::size_t n = 0;
      ls >> key >> n;
      std::vector<std::uint32_t> y(n);
      for (auto& v : y) ls >> v;
      if (!ls) throw fail("truncated label row");
      m.labels.emplace(parse_split_key(key), LabelVector(std::move(y)));
    } else if (tag == "entry") {
      ManifestEntry e;
      std::string key, crc;
      ls >> key >> e.key.seed >> e.num_points >> e.num_classes >> crc >>
          e.file >> e.key.arch;
      if (!ls) throw fail("truncated entry");
      e.key.split = parse_split_key(key);
      e.crc32 = static_cast<std::uint32_t>(std::stoul(crc, nullptr, 16));
      m.entries.push_back(std::move(e));
    } else {
      throw fail("unknown record '" + tag + "'");
    }
  }
  if (m.space_id.empty()) throw DataError("manifest has no space");
  return m;
}

PredictionStore::PredictionStore(fs::path root) : root_(std::move(root)) {}

PredictionStore PredictionStore::create(const fs::path& root,
                                        std::string space_id) {
  if (fs::exists(root / kManifestName)) {
    throw DataError("store already exists at " + root.string());
  }
  fs::create_directories(root / kMatrixDir);
  PredictionStore store(root);
  StoreManifest m;
  m.space_id = std::move(space_id);
  store.commit(m);
  store.collect_garbage();
  return store;
}

PredictionStore PredictionStore::open(const fs::path& root) {
  const auto path = root / kManifestName;
  if (!fs::exists(path)) throw DataError("no store at " + root.string());
  const auto bytes = read_file(path);
  PredictionStore store(root);
  store.manifest_ =
      StoreManifest::deserialize(std::string(bytes.begin(), bytes.end()));
  for (std::size_t i = 0; i < store.manifest_.entries.size(); ++i) {
    const auto& e = store.manifest_.entries[i];
    if (!store.index_.emplace(e.key, i).second) {
      throw DataError("duplicate manifest entry for " + e.key.arch);
    }
  }
  fs::create_directories(root / kMatrixDir);
  store.collect_garbage();
  return store;
}

PredictionStore PredictionStore::open_or_create(const fs::path& root,
                                                std::string space_id) {
  if (!fs::exists(root / kManifestName)) return create(root, std::move(space_id));
  auto store = open(root);
  if (store.space_id() != space_id) {
    throw DataError("store at " + root.string() + " holds space " +
                    store.space_id() + ", expected " + space_id);
  }
  return store;
}

void PredictionStore::collect_garbage() {
  std::set<std::string> live;
  for (const auto& e : manifest_.entries) live.insert(e.file);
  std::error_code ec;
  fs::remove(root_ / (std::string(kManifestName) + ".tmp"), ec);
  std::vector<fs::path> doomed;
  for (const auto& f : fs::directory_iterator(root_ / kMatrixDir)) {
    const auto rel = fs::relative(f.path(), root_).generic_string();
    if (!live.contains(rel)) doomed.push_back(f.path());
  }
  for (const auto& p : doomed) fs::remove(p, ec);
  next_file_ = manifest_.entries.size();
}

void PredictionStore::set_labels(SplitKey key, const LabelVector& labels) {
  if (auto it = manifest_.labels.find(key); it != manifest_.labels.end()) {
    if (it->second == labels) return;
    throw DataError("labels for " + to_string(key) + " differ from stored");
  }
  StoreManifest next = manifest_;
  next.labels.emplace(key, labels);
  commit(next);
}

const LabelVector& PredictionStore::labels(SplitKey key) const {
  auto it = manifest_.labels.find(key);
  if (it == manifest_.labels.end()) {
    throw DataError("store has no labels for " + to_string(key));
  }
  return it->second;
}

void PredictionStore::put(const StoreKey& key, const PredictionMatrix& matrix) {
  put_batch({{key, matrix}});
}

void PredictionStore::put_batch(
    const std::vector<std::pair<StoreKey, PredictionMatrix>>& items) {
  StoreManifest next = manifest_;
  std::set<StoreKey> seen;
  for (const auto& [key, matrix] : items) {
    if (index_.contains(key) || !seen.insert(key).second) {
      throw std::invalid_argument("store already holds " + key.arch + " seed " +
                                  std::to_string(key.seed) + " " +
                                  to_string(key.split));
    }
    if (labels(key.split).size() != matrix.num_points()) {
      throw std::invalid_argument("matrix rows do not match labels of " +
                                  to_string(key.split));
    }
  }
  std::size_t file_no = next_file_;
  for (const auto& [key, matrix] : items) {
    const auto bytes = encode_matrix(matrix);
    ManifestEntry e;
    e.key = key;
    e.file = matrix_file_name(file_no++);
    e.crc32 = crc32_of(bytes);
    e.num_points = static_cast<std::uint32_t>(matrix.num_points());
    e.num_classes = static_cast<std::uint32_t>(matrix.num_classes());
    write_file_atomic(root_ / e.file, bytes);
    next.entries.push_back(std::move(e));
    if (fault_ == FaultPoint::kAfterMatrixWrite) {
      fault_ = FaultPoint::kNone;
      throw SimulatedCrash("crash after matrix write");
    }
  }
  commit(next);
  next_file_ = file_no;
}

void PredictionStore::commit(const StoreManifest& next) {
  const auto text = next.serialize();
  const auto path = root_ / kManifestName;
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << text;
    if (!out) throw DataError("short write to " + tmp.string());
  }
  if (fault_ == FaultPoint::kBeforeManifestRename) {
    fault_ = FaultPoint::kNone;
    throw SimulatedCrash("crash before manifest rename");
  }
  fs::rename(tmp, path);
  for (std::size_t i = manifest_.entries.size(); i < next.entries.size(); ++i) {
    index_.emplace(next.entries[i].key, i);
  }
  manifest_ = next;
}

PredictionMatrix PredictionStore::load(const ManifestEntry& e) const {
  const auto bytes = read_file(root_ / e.file);
  if (crc32_of(bytes) != e.crc32) {
    throw DataError("checksum mismatch in " + e.file + " (" + e.key.arch +
                    " seed " + std::to_string(e.key.seed) + ")");
  }
  auto m = decode_matrix(bytes);
  if (m.num_points() != e.num_points || m.num_classes() != e.num_classes) {
    throw DataError("shape of " + e.file + " disagrees with manifest");
  }
  return m;
}

PredictionMatrix PredictionStore::get(const StoreKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) {
    throw DataError("store has no entry for " + key.arch + " seed " +
                    std::to_string(key.seed) + " " + to_string(key.split));
  }
  return load(manifest_.entries[it->second]);
}

VerifyReport PredictionStore::verify() const {
  VerifyReport report;
  for (const auto& e : manifest_.entries) {
    ++report.entries_checked;
    try {
      auto m = load(e);
      auto lit = manifest_.labels.find(e.key.split);
      if (lit == manifest_.labels.end()) {
        report.problems.push_back(e.file + ": no labels for " +
                                  to_string(e.key.split));
      } else if (lit->second.size() != m.num_points()) {
        report.problems.push_back(e.file + ": row count differs from labels");
      } else {
        for (std::size_t i = 0; i < lit->second.size(); ++i) {
          if (lit->second[i] >= m.num_classes()) {
            report.problems.push_back(e.file + ": label out of range");
            break;
          }
        }
      }
    } catch (const DataError& err) {
      report.problems.push_back(err.what());
    }
  }
  return report;
}

}  // namespace nes
