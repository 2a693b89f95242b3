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

#ifndef NES_STORE_TABULAR_IMPORT_H_
#define NES_STORE_TABULAR_IMPORT_H_

#include <filesystem>
#include <string_view>

#include "nes/store/prediction_store.h"

namespace nes {

inline constexpr std::string_view kTabularJsonFormat = "nes-tabular-json/1";

// Converts an exported tabular benchmark into a new store at `store_root`.
//
// JSON layout:
//   {"format": "nes-tabular-json/1",
//    "space": "tabular-cell:4:none,skip_connect,...",
//    "num_classes": C,
//    "labels": {"val@0": [...], "test@0": [...], ...},
//    "records": [{"arch": "|op~0|+|...|", "seed": 777, "split": "val@0",
//                 "probs": [[...], ...]}, ...]}
//
// A record carries either "probs" or "logits" (softmaxed on import). Every
// (arch, seed) must cover every labelled split; val@0 and test@0 are
// mandatory. Throws DataError on an unknown format or missing splits.
StoreManifest import_tabular(const std::filesystem::path& export_file,
                             const std::filesystem::path& store_root);

// Writes `store` in the layout read by import_tabular, as probabilities.
void export_tabular(const PredictionStore& store,
                    const std::filesystem::path& export_file);

}  // namespace nes

#endif  // NES_STORE_TABULAR_IMPORT_H_
