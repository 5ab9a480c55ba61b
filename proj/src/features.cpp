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

#include "nncap/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "nncap/error.hpp"
#include "nncap/io_util.hpp"
#include "nncap/parallel.hpp"

namespace nncap {
namespace {

constexpr char kMagic[4] = {'N', 'N', 'F', 'V'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kHeaderBytes = 4 + 4 + 4 + 8;

double dot(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return sum;
}

void read_floats(std::istream& in, std::span<float> out, std::string_view what) {
  static_assert(sizeof(float) == 4);
  if (!in.read(reinterpret_cast<char*>(out.data()),
               static_cast<std::streamsize>(out.size() * sizeof(float)))) {
    throw LoadError("unexpected end of file while reading " + std::string(what));
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (float& v : out) {
      auto bits = std::bit_cast<std::uint32_t>(v);
      bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) |
             (bits >> 24);
      v = std::bit_cast<float>(bits);
    }
  }
}

FeatureStore load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string source = path.string();

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw LoadError(source + ": bad magic, expected NNFV");
  }
  const auto version = io::read_u32(in, "version");
  if (version != kVersion) {
    throw LoadError(source + ": unsupported version " + std::to_string(version));
  }
  const auto dim = io::read_u32(in, "dim");
  const auto count = io::read_u64(in, "count");
  if (dim == 0) throw LoadError(source + ": dim must be positive");

  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  const std::uint64_t record_bytes = 8 + 4ULL * dim;
  if (!ec && (count > (file_size - kHeaderBytes) / record_bytes ||
              kHeaderBytes + count * record_bytes != file_size)) {
    throw LoadError(source + ": file size does not match header (dim " + std::to_string(dim) +
                    ", count " + std::to_string(count) + ")");
  }

  std::vector<ImageId> ids(count);
  std::vector<float> matrix(count * dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    ids[r] = static_cast<ImageId>(io::read_u64(in, "image id"));
    read_floats(in, std::span<float>(matrix.data() + r * dim, dim), "feature values");
  }
  try {
    return FeatureStore(dim, std::move(ids), std::move(matrix));
  } catch (const LoadError& e) {
    throw LoadError(source + ": " + e.what());
  }
}

FeatureStore load_jsonl(const std::filesystem::path& path) {
  using nlohmann::json;
  const std::string source = path.string();
  std::istringstream in(io::read_file(path));
  std::vector<ImageId> ids;
  std::vector<float> matrix;
  std::size_t dim = 0;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ": line " + std::to_string(lineno);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LoadError(where + ": invalid JSON: " + e.what());
    }
    if (!record.is_object() || !record.contains("image_id") ||
        !record["image_id"].is_number_integer() || !record.contains("vector") ||
        !record["vector"].is_array()) {
      throw LoadError(where + ": expected {\"image_id\": int, \"vector\": [numbers]}");
    }
    const json& values = record["vector"];
    if (ids.empty()) {
      dim = values.size();
      if (dim == 0) throw LoadError(where + ": empty vector");
    } else if (values.size() != dim) {
      throw LoadError(where + ": vector has " + std::to_string(values.size()) +
                      " values, expected " + std::to_string(dim));
    }
    for (const json& v : values) {
      if (!v.is_number()) throw LoadError(where + ": non-numeric vector entry");
      matrix.push_back(v.get<float>());
    }
    ids.push_back(record["image_id"].get<ImageId>());
  }
  if (ids.empty()) throw LoadError(source + ": no feature records");
  try {
    return FeatureStore(dim, std::move(ids), std::move(matrix));
  } catch (const LoadError& e) {
    throw LoadError(source + ": " + e.what());
  }
}

void check_query(std::span<const float> query, const FeatureStore& store, std::size_t k) {
  if (query.size() != store.dim()) {
    throw UsageError("query has dim " + std::to_string(query.size()) + ", store has dim " +
                     std::to_string(store.dim()));
  }
  if (k == 0) throw UsageError("number of neighbors must be positive");
  if (k > store.size()) {
    throw UsageError("requested " + std::to_string(k) + " neighbors but the store holds " +
                     std::to_string(store.size()) + " images");
  }
}

}  // namespace

FeatureStore::FeatureStore(std::size_t dim, std::vector<ImageId> ids, std::vector<float> matrix)
    : dim_(dim), ids_(std::move(ids)), matrix_(std::move(matrix)) {
  if (dim_ == 0) throw LoadError("feature dim must be positive");
  if (matrix_.size() != ids_.size() * dim_) {
    throw LoadError("feature matrix size does not match id count times dim");
  }
  norms_.resize(ids_.size());
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw LoadError("duplicate image id " + std::to_string(ids_[i]));
    }
    norms_[i] = euclidean_norm(row(i));
    if (!std::isfinite(norms_[i])) {
      throw LoadError("non-finite feature vector for image " + std::to_string(ids_[i]));
    }
    if (norms_[i] == 0.0) {
      throw LoadError("zero-norm feature vector for image " + std::to_string(ids_[i]));
    }
  }
}

std::optional<std::size_t> FeatureStore::index_of(ImageId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> FeatureStore::vector_of(ImageId id) const {
  auto i = index_of(id);
  if (!i) throw UsageError("image " + std::to_string(id) + " has no feature vector");
  return row(*i);
}

FeatureStore load_features(const std::filesystem::path& path) {
  if (io::has_extension(path, ".jsonl")) return load_jsonl(path);
  return load_binary(path);
}

std::string features_to_bytes(const FeatureStore& store) {
  std::ostringstream out(std::ios::binary);
  out.write(kMagic, 4);
  io::write_u32(out, kVersion);
  io::write_u32(out, static_cast<std::uint32_t>(store.dim()));
  io::write_u64(out, store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    io::write_u64(out, static_cast<std::uint64_t>(store.ids()[i]));
    for (float v : store.row(i)) io::write_f32(out, v);
  }
  return std::move(out).str();
}

void save_features(const FeatureStore& store, const std::filesystem::path& path) {
  io::write_file(path, features_to_bytes(store));
}

double euclidean_norm(std::span<const float> v) { return std::sqrt(dot(v, v)); }

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw UsageError("cosine_similarity: dim mismatch (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  const double denom = euclidean_norm(a) * euclidean_norm(b);
  if (denom == 0.0) throw UsageError("cosine_similarity: zero vector");
  return std::clamp(dot(a, b) / denom, -1.0, 1.0);
}

NeighborList knn(std::span<const float> query, const FeatureStore& store, std::size_t k,
                 unsigned threads) {
  check_query(query, store, k);
  const double query_norm = euclidean_norm(query);
  if (query_norm == 0.0 || !std::isfinite(query_norm)) {
    throw UsageError("query vector has zero or non-finite norm");
  }

  const std::size_t n = store.size();
  std::vector<double> sims(n);
  parallel_for(n, threads, [&](std::size_t i) {
    sims[i] = std::clamp(dot(query, store.row(i)) / (query_norm * store.norm(i)), -1.0, 1.0);
  });

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& ids = store.ids();
  auto before = [&](std::size_t a, std::size_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return ids[a] < ids[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    before);

  NeighborList out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) out.push_back({ids[order[r]], sims[order[r]]});
  return out;
}

double mean_nn_distance(std::span<const float> query, const FeatureStore& store, std::size_t j,
                        unsigned threads) {
  const NeighborList neighbors = knn(query, store, j, threads);
  double total = 0.0;
  for (const Neighbor& nb : neighbors) total += 1.0 - nb.similarity;
  return total / static_cast<double>(neighbors.size());
}

}  // namespace nncap
