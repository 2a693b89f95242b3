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

#ifndef NES_HARNESS_CSV_H_
#define NES_HARNESS_CSV_H_

#include <string>
#include <string_view>
#include <vector>

namespace nes::csv {

// Quotes `field` when it holds a comma, quote or line break.
std::string quote(std::string_view field);

// Splits one line, honouring double-quoted fields. Throws DataError on an
// unterminated quote.
std::vector<std::string> split_line(std::string_view line);

}  // namespace nes::csv

#endif  // NES_HARNESS_CSV_H_
