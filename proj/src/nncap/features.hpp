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

#ifndef NNCAP_FEATURES_HPP_
#define NNCAP_FEATURES_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nncap/corpus.hpp"

namespace nncap {

// Dense per-image feature vectors stored row-major in 32-bit floats, with
// Euclidean row norms cached at construction.
class FeatureStore {
 public:
  FeatureStore() = default;

  // Throws LoadError on a zero-norm or non-finite row, duplicate ids, or a
  // matrix whose size is not ids.size() * dim.
  FeatureStore(std::size_t dim, std::vector<ImageId> ids, std::vector<float> matrix);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<ImageId>& ids() const { return ids_; }
  const std::vector<float>& matrix() const { return matrix_; }

  std::span<const float> row(std::size_t i) const {
    return {matrix_.data() + i * dim_, dim_};
  }
  double norm(std::size_t i) const { return norms_[i]; }
  std::optional<std::size_t> index_of(ImageId id) const;
  // Throws UsageError for an unknown id.
  std::span<const float> vector_of(ImageId id) const;

 private:
  std::size_t dim_ = 0;
  std::vector<ImageId> ids_;
  std::vector<float> matrix_;
  std::vector<double> norms_;
  std::unordered_map<ImageId, std::size_t> index_;
};

// "NNFV" binary format, or JSON lines {image_id, vector} for ".jsonl" paths.
FeatureStore load_features(const std::filesystem::path& path);
std::string features_to_bytes(const FeatureStore& store);
void save_features(const FeatureStore& store, const std::filesystem::path& path);

struct Neighbor {
  ImageId image_id = 0;
  double similarity = 0.0;

  bool operator==(const Neighbor&) const = default;
};

// Descending by similarity, ties by ascending image id.
using NeighborList = std::vector<Neighbor>;

double euclidean_norm(std::span<const float> v);

// dot(a, b) / (|a| |b|) accumulated in double and clamped to [-1, 1].
// Throws UsageError on a dim mismatch or a zero vector.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// Exact top-k by exhaustive scan. `threads` parallelizes the scan only; the
// result is identical for every thread count.
NeighborList knn(std::span<const float> query, const FeatureStore& store, std::size_t k,
                 unsigned threads = 1);

// Mean cosine distance (1 - similarity) to the j nearest rows.
double mean_nn_distance(std::span<const float> query, const FeatureStore& store,
                        std::size_t j, unsigned threads = 1);

}  // namespace nncap

#endif  // NNCAP_FEATURES_HPP_
