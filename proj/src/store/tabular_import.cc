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

#include "nes/store/tabular_import.h"

#include <fstream>
#include <map>
#include <set>

#include "json.hpp"
#include "nes/error.h"
#include "nes/search/architecture.h"

namespace nes {
namespace {

using nlohmann::json;

std::vector<double> flatten_rows(const json& rows, std::size_t c,
                                 const std::string& where) {
  if (!rows.is_array() || rows.empty()) {
    throw DataError(where + ": expected a non-empty array of rows");
  }
  std::vector<double> out;
  out.reserve(rows.size() * c);
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != c) {
      throw DataError(where + ": every row needs " + std::to_string(c) +
                      " entries");
    }
    for (const auto& v : row) out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

StoreManifest import_tabular(const std::filesystem::path& export_file,
                             const std::filesystem::path& store_root) {
  std::ifstream in(export_file);
  if (!in) throw DataError("cannot open " + export_file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed export: ") + e.what());
  }
  try {
    if (!doc.contains("format") || doc["format"] != kTabularJsonFormat) {
      throw DataError("unknown export format " +
                      (doc.contains("format") ? doc["format"].dump() : "<none>"));
    }
    const auto space_id = doc.at("space").get<std::string>();
    const auto space = SearchSpace::parse(space_id);
    const auto c = doc.at("num_classes").get<std::size_t>();

    std::map<SplitKey, LabelVector> labels;
    for (const auto& [name, ys] : doc.at("labels").items()) {
      labels.emplace(parse_split_key(name),
                     LabelVector(ys.get<std::vector<std::uint32_t>>()));
    }
    for (auto required : {val_at(0), test_at(0)}) {
      if (!labels.contains(required)) {
        throw DataError("export lacks labels for " + to_string(required));
      }
    }

    auto store = PredictionStore::create(store_root, space_id);
    for (const auto& [key, y] : labels) store.set_labels(key, y);

    std::map<std::pair<std::string, std::uint64_t>, std::set<SplitKey>> covered;
    std::vector<std::pair<StoreKey, PredictionMatrix>> batch;
    for (const auto& rec : doc.at("records")) {
      const auto arch = Architecture::parse(space, rec.at("arch").get<std::string>());
      StoreKey key{arch.to_string(space), rec.at("seed").get<std::uint64_t>(),
                   parse_split_key(rec.at("split").get<std::string>())};
      auto lit = labels.find(key.split);
      if (lit == labels.end()) {
        throw DataError("record split " + to_string(key.split) + " has no labels");
      }
      const std::string where = key.arch + " seed " + std::to_string(key.seed);
      const std::size_t n = lit->second.size();
      std::vector<double> values;
      bool logits = false;
      if (rec.contains("probs")) {
        values = flatten_rows(rec["probs"], c, where);
      } else if (rec.contains("logits")) {
        values = flatten_rows(rec["logits"], c, where);
        logits = true;
      } else {
        throw DataError(where + ": record has neither probs nor logits");
      }
      if (values.size() != n * c) {
        throw DataError(where + ": row count differs from labels");
      }
      auto matrix = logits ? PredictionMatrix::from_logits(n, c, values)
                           : PredictionMatrix(n, c, std::move(values));
      covered[{key.arch, key.seed}].insert(key.split);
      batch.emplace_back(std::move(key), std::move(matrix));
      if (batch.size() >= 1024) {
        store.put_batch(batch);
        batch.clear();
      }
    }
    if (!batch.empty()) store.put_batch(batch);
    for (const auto& [id, splits] : covered) {
      if (splits.size() != labels.size()) {
        throw DataError(id.first + " seed " + std::to_string(id.second) +
                        " is missing splits");
      }
    }
    return store.manifest();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed export: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid export: ") + e.what());
  }
}

void export_tabular(const PredictionStore& store,
                    const std::filesystem::path& export_file) {
  json doc;
  doc["format"] = kTabularJsonFormat;
  doc["space"] = store.space_id();
  std::size_t c = 0;
  json labels = json::object();
  for (const auto& [key, y] : store.manifest().labels) {
    labels[to_string(key)] = y.values();
  }
  doc["labels"] = std::move(labels);
  json records = json::array();
  for (const auto& e : store.manifest().entries) {
    const auto m = store.get(e.key);
    c = m.num_classes();
    json rows = json::array();
    for (std::size_t i = 0; i < m.num_points(); ++i) {
      json row = json::array();
      for (std::size_t k = 0; k < c; ++k) row.push_back(m(i, k));
      rows.push_back(std::move(row));
    }
    records.push_back({{"arch", e.key.arch},
                       {"seed", e.key.seed},
                       {"split", to_string(e.key.split)},
                       {"probs", std::move(rows)}});
  }
  doc["num_classes"] = c;
  doc["records"] = std::move(records);
  std::ofstream out(export_file);
  if (!out) throw DataError("cannot write " + export_file.string());
  out << doc.dump();
}

}  // namespace nes
