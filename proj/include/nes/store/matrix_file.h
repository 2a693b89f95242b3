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

#ifndef NES_STORE_MATRIX_FILE_H_
#define NES_STORE_MATRIX_FILE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nes/core/prediction_matrix.h"

namespace nes {

// Binary layout: "NESP", u32 version (1), u32 N, u32 C, then N*C
// little-endian IEEE-754 binary32 values, row-major.
inline constexpr char kMatrixMagic[4] = {'N', 'E', 'S', 'P'};
inline constexpr std::uint32_t kMatrixFormatVersion = 1;
inline constexpr std::size_t kMatrixHeaderBytes = 16;

std::vector<std::uint8_t> encode_matrix(const PredictionMatrix& matrix);

// Throws DataError on a malformed header, a length mismatch or rows that
// violate the PredictionMatrix invariants.
PredictionMatrix decode_matrix(std::span<const std::uint8_t> bytes);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// Writes `bytes` to `path` via a sibling temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view text);

}  // namespace nes

#endif  // NES_STORE_MATRIX_FILE_H_
