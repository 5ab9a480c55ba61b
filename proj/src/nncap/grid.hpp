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

#ifndef NNCAP_GRID_HPP_
#define NNCAP_GRID_HPP_

#include <cstddef>
#include <string_view>
#include <vector>

namespace nncap {

// Parses a hyperparameter grid: comma-separated items, each either a
// positive integer or an inclusive range "lo:hi:step" ("lo:hi" steps by 1).
// Throws UsageError on malformed input.
std::vector<std::size_t> parse_grid(std::string_view spec);

}  // namespace nncap

#endif  // NNCAP_GRID_HPP_
