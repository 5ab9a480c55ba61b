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

// Little-endian binary encoding and small file helpers shared by the
// feature, df and index writers.

#ifndef NNCAP_IO_UTIL_HPP_
#define NNCAP_IO_UTIL_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace nncap::io {

void write_u32(std::ostream& out, std::uint32_t value);
void write_u64(std::ostream& out, std::uint64_t value);
void write_f32(std::ostream& out, float value);

// Each reader throws LoadError naming `what` on a short read.
std::uint32_t read_u32(std::istream& in, std::string_view what);
std::uint64_t read_u64(std::istream& in, std::string_view what);
float read_f32(std::istream& in, std::string_view what);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

bool has_extension(const std::filesystem::path& path, std::string_view ext);

}  // namespace nncap::io

#endif  // NNCAP_IO_UTIL_HPP_
