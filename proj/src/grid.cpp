// Copyright (c) 2026, The nncap Authors. All rights reserved.
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

#include "nncap/grid.hpp"

#include <charconv>
#include <string>

#include "nncap/error.hpp"

namespace nncap {
namespace {

std::size_t parse_positive(std::string_view text, std::string_view spec) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end || value == 0) {
    throw UsageError("invalid grid value '" + std::string(text) + "' in '" + std::string(spec) +
                     "' (expected a positive integer)");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

}  // namespace

std::vector<std::size_t> parse_grid(std::string_view spec) {
  std::vector<std::size_t> values;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const std::string_view item = trim(
        spec.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    const std::size_t c1 = item.find(':');
    if (c1 == std::string_view::npos) {
      values.push_back(parse_positive(item, spec));
    } else {
      const std::size_t c2 = item.find(':', c1 + 1);
      const std::size_t lo = parse_positive(item.substr(0, c1), spec);
      const std::size_t hi = parse_positive(
          item.substr(c1 + 1, c2 == std::string_view::npos ? std::string_view::npos : c2 - c1 - 1),
          spec);
      const std::size_t step =
          c2 == std::string_view::npos ? 1 : parse_positive(item.substr(c2 + 1), spec);
      if (lo > hi) throw UsageError("empty range '" + std::string(item) + "'");
      for (std::size_t v = lo; v <= hi; v += step) values.push_back(v);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return values;
}

}  // namespace nncap
