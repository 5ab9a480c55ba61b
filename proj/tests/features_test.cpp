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

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "nncap/error.hpp"
#include "nncap/features.hpp"
#include "oracles.hpp"

namespace nncap {
namespace {

using testing::TempDir;

// Hand-rolled NNFV writer, independent of save_features.
void write_raw_nnfv(const std::filesystem::path& path, std::uint32_t dim,
                    const std::vector<std::pair<std::uint64_t, std::vector<float>>>& rows,
                    const char* magic = "NNFV", std::uint32_t version = 1) {
  std::ofstream out(path, std::ios::binary);
  out.write(magic, 4);
  auto put = [&](auto v) {
    for (std::size_t i = 0; i < sizeof(v); ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  put(version);
  put(dim);
  put(static_cast<std::uint64_t>(rows.size()));
  for (const auto& [id, values] : rows) {
    put(id);
    for (float f : values) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put(bits);
    }
  }
}

FeatureStore random_store(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  std::vector<ImageId> ids(n);
  std::vector<float> matrix(n * dim);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<ImageId>(i * 13 + 5);
  std::shuffle(ids.begin(), ids.end(), rng);
  for (float& v : matrix) v = gauss(rng);
  return FeatureStore(dim, std::move(ids), std::move(matrix));
}

std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  std::vector<float> v(dim);
  for (float& x : v) x = gauss(rng);
  return v;
}

TEST(LoadFeatures, ThreeVectorsOfDimFour) {
  TempDir dir;
  write_raw_nnfv(dir / "f.nnfv", 4,
                 {{10, {1, 0, 0, 0}}, {11, {0, 1, 0, 0}}, {12, {1, 1, 1, 1}}});
  const FeatureStore store = load_features(dir / "f.nnfv");
  EXPECT_EQ(store.dim(), 4u);
  EXPECT_EQ(store.ids(), (std::vector<ImageId>{10, 11, 12}));
  EXPECT_DOUBLE_EQ(store.norm(2), 2.0);
}

TEST(LoadFeatures, ZeroRowNamesImage) {
  TempDir dir;
  write_raw_nnfv(dir / "f.nnfv", 2, {{1, {1, 2}}, {77, {0, 0}}});
  try {
    load_features(dir / "f.nnfv");
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("77"), std::string::npos) << e.what();
  }
}

TEST(LoadFeatures, FormatErrors) {
  TempDir dir;
  write_raw_nnfv(dir / "magic.nnfv", 2, {{1, {1, 2}}}, "NNFX");
  EXPECT_THROW(load_features(dir / "magic.nnfv"), LoadError);
  write_raw_nnfv(dir / "version.nnfv", 2, {{1, {1, 2}}}, "NNFV", 2);
  EXPECT_THROW(load_features(dir / "version.nnfv"), LoadError);
  write_raw_nnfv(dir / "dup.nnfv", 2, {{1, {1, 2}}, {1, {3, 4}}});
  EXPECT_THROW(load_features(dir / "dup.nnfv"), LoadError);

  write_raw_nnfv(dir / "trunc.nnfv", 2, {{1, {1, 2}}, {2, {3, 4}}});
  std::filesystem::resize_file(dir / "trunc.nnfv", std::filesystem::file_size(dir / "trunc.nnfv") - 3);
  EXPECT_THROW(load_features(dir / "trunc.nnfv"), LoadError);

  EXPECT_THROW(load_features(dir / "absent.nnfv"), IoError);
}

TEST(LoadFeatures, RandomStoreRoundTripIsBitwise) {
  std::mt19937_64 rng(11);
  TempDir dir;
  for (int trial = 0; trial < 5; ++trial) {
    const FeatureStore store = random_store(rng, 1 + rng() % 50, 1 + rng() % 33);
    save_features(store, dir / "r.nnfv");
    const FeatureStore back = load_features(dir / "r.nnfv");
    EXPECT_EQ(back.ids(), store.ids());
    ASSERT_EQ(back.matrix().size(), store.matrix().size());
    EXPECT_EQ(std::memcmp(back.matrix().data(), store.matrix().data(),
                          store.matrix().size() * sizeof(float)),
              0);
  }
}

TEST(LoadFeatures, JsonLines) {
  TempDir dir;
  testing::write_text(dir / "f.jsonl",
                      "{\"image_id\": 3, \"vector\": [1, 2, 3]}\n"
                      "{\"image_id\": 4, \"vector\": [0.5, -1, 2]}\n");
  const FeatureStore store = load_features(dir / "f.jsonl");
  EXPECT_EQ(store.size(), 2u);
  EXPECT_EQ(store.dim(), 3u);
  EXPECT_FLOAT_EQ(store.vector_of(4)[0], 0.5f);

  testing::write_text(dir / "ragged.jsonl",
                      "{\"image_id\": 3, \"vector\": [1, 2, 3]}\n"
                      "{\"image_id\": 4, \"vector\": [1, 2]}\n");
  EXPECT_THROW(load_features(dir / "ragged.jsonl"), LoadError);
}

TEST(CosineSimilarity, Examples) {
  const std::vector<float> a{3, 4}, x{1, 0}, y{0, 1}, d{1, 1};
  EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(x, y), 0.0);
  EXPECT_NEAR(cosine_similarity(d, x), 0.7071, 1e-4);
  const std::vector<float> three{1, 2, 3}, zero{0, 0};
  EXPECT_THROW(cosine_similarity(x, three), UsageError);
  EXPECT_THROW(cosine_similarity(x, zero), UsageError);
}

TEST(Knn, SelfRetrievalAndTotalOrder) {
  std::mt19937_64 rng(5);
  const FeatureStore store = random_store(rng, 40, 8);
  const auto self = knn(store.row(17), store, 1);
  ASSERT_EQ(self.size(), 1u);
  EXPECT_EQ(self[0].image_id, store.ids()[17]);
  EXPECT_NEAR(self[0].similarity, 1.0, 1e-12);

  const auto all = knn(random_vector(rng, 8), store, store.size());
  EXPECT_EQ(all.size(), store.size());
  for (std::size_t i = 1; i < all.size(); ++i) {
    EXPECT_TRUE(all[i - 1].similarity > all[i].similarity ||
                (all[i - 1].similarity == all[i].similarity &&
                 all[i - 1].image_id < all[i].image_id));
  }
}

TEST(Knn, TiesBreakOnAscendingId) {
  const FeatureStore store(2, {9, 4, 6}, {1, 0, 2, 0, 1, 1});
  const std::vector<float> q{1, 0};
  const auto nn = knn(q, store, 3);
  EXPECT_EQ(nn[0].image_id, 4);
  EXPECT_EQ(nn[1].image_id, 9);
  EXPECT_EQ(nn[2].image_id, 6);
}

TEST(Knn, MatchesDoublePrecisionOracle) {
  std::mt19937_64 rng(21);
  const FeatureStore store = random_store(rng, 200, 16);
  for (int q = 0; q < 20; ++q) {
    const auto query = random_vector(rng, 16);
    const auto oracle = testing::brute_force_knn(query, store);
    const auto got = knn(query, store, 50);
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].image_id, oracle[i].id);
      EXPECT_NEAR(got[i].similarity, oracle[i].similarity, 1e-12);
    }
  }
}

TEST(Knn, PrefixScaleAndThreadInvariance) {
  std::mt19937_64 rng(8);
  const FeatureStore store = random_store(rng, 300, 12);
  for (int trial = 0; trial < 10; ++trial) {
    auto query = random_vector(rng, 12);
    const auto big = knn(query, store, 100);
    const auto small = knn(query, store, 30);
    EXPECT_TRUE(std::equal(small.begin(), small.end(), big.begin()));

    std::vector<float> scaled(query);
    for (float& v : scaled) v *= 4.0f;  // power of two keeps the floats exact
    EXPECT_EQ(knn(scaled, store, 100), big);
    EXPECT_EQ(knn(query, store, 100, 4), big);
  }
}

TEST(Knn, UsageErrors) {
  const FeatureStore store(2, {1, 2}, {1, 0, 0, 1});
  const std::vector<float> q{1, 0}, wrong{1, 0, 0}, zero{0, 0};
  EXPECT_THROW(knn(q, store, 3), UsageError);
  EXPECT_THROW(knn(q, store, 0), UsageError);
  EXPECT_THROW(knn(wrong, store, 1), UsageError);
  EXPECT_THROW(knn(zero, store, 1), UsageError);
}

TEST(MeanNnDistance, Examples) {
  const FeatureStore dup(2, {1, 2, 3}, {1, 1, 2, 2, 3, 3});
  const std::vector<float> q{1, 1};
  EXPECT_NEAR(mean_nn_distance(q, dup, 3), 0.0, 1e-15);

  const FeatureStore ortho(2, {1, 2}, {1, 0, 0, 1});
  const std::vector<float> x{1, 0};
  EXPECT_DOUBLE_EQ(mean_nn_distance(x, ortho, 2), 0.5);
  EXPECT_THROW(mean_nn_distance(x, ortho, 3), UsageError);
}

TEST(MeanNnDistance, MatchesOracle) {
  std::mt19937_64 rng(99);
  const FeatureStore store = random_store(rng, 150, 10);
  for (int trial = 0; trial < 10; ++trial) {
    const auto query = random_vector(rng, 10);
    const auto oracle = testing::brute_force_knn(query, store);
    double total = 0.0;
    for (std::size_t i = 0; i < 50; ++i) total += 1.0 - oracle[i].similarity;
    const double got = mean_nn_distance(query, store, 50);
    EXPECT_NEAR(got, total / 50.0, 1e-6);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 2.0);
  }
}

}  // namespace
}  // namespace nncap
