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

#include "nes/store/matrix_file.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <zlib.h>

#include "nes/error.h"

namespace nes {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(bytes[at + b]) << (8 * b);
  }
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_matrix(const PredictionMatrix& matrix) {
  std::vector<std::uint8_t> out;
  out.reserve(kMatrixHeaderBytes + 4 * matrix.values().size());
  out.insert(out.end(), std::begin(kMatrixMagic), std::end(kMatrixMagic));
  put_u32(out, kMatrixFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(matrix.num_points()));
  put_u32(out, static_cast<std::uint32_t>(matrix.num_classes()));
  for (double p : matrix.values()) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(p)));
  }
  return out;
}

PredictionMatrix decode_matrix(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMatrixHeaderBytes ||
      std::memcmp(bytes.data(), kMatrixMagic, 4) != 0) {
    throw DataError("not a prediction matrix file");
  }
  if (get_u32(bytes, 4) != kMatrixFormatVersion) {
    throw DataError("unsupported matrix format version " +
                    std::to_string(get_u32(bytes, 4)));
  }
  const std::size_t n = get_u32(bytes, 8);
  const std::size_t c = get_u32(bytes, 12);
  if (bytes.size() != kMatrixHeaderBytes + 4 * n * c) {
    throw DataError("matrix file length " + std::to_string(bytes.size()) +
                    " does not match " + std::to_string(n) + "x" +
                    std::to_string(c));
  }
  std::vector<double> values(n * c);
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = std::bit_cast<float>(get_u32(bytes, kMatrixHeaderBytes + 4 * k));
  }
  try {
    return PredictionMatrix(n, c, std::move(values));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("stored matrix is not row-stochastic: ") +
                    e.what());
  }
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view text) {
  write_file_atomic(
      path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                      text.size()));
}

}  // namespace nes
