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

#include "nncap/nncap.h"

#include <gtest/gtest.h>

#include <json.hpp>
#include <deque>
#include <sstream>
#include <string>

#include "fixtures.hpp"

namespace {

using nncap::testing::TempDir;

std::string take(char* s) {
  std::string out = s ? s : "";
  nncap_free(s);
  return out;
}

class CApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto fx = nncap::testing::make_cluster_fixture();
    nncap::save_features(fx.train, dir_ / "train.nnfv");
    nncap::save_captions(fx.train_corpus, dir_ / "train.json");
    nncap::save_features(fx.queries, dir_ / "queries.nnfv");
    nncap::save_captions(fx.query_refs, dir_ / "refs.json");
    ASSERT_EQ(nncap_build_index(path("train.nnfv"), path("train.json"), path("index"), nullptr),
              NNCAP_OK)
        << nncap_last_error();
    ASSERT_EQ(nncap_index_open(path("index"), &index_), NNCAP_OK) << nncap_last_error();
    ASSERT_EQ(nncap_features_load(path("queries.nnfv"), &queries_), NNCAP_OK);
    ASSERT_EQ(nncap_corpus_load(path("refs.json"), &refs_, nullptr), NNCAP_OK);
  }
  void TearDown() override {
    nncap_index_free(index_);
    nncap_features_free(queries_);
    nncap_corpus_free(refs_);
  }
  const char* path(const std::string& name) {
    paths_.push_back((dir_ / name).string());
    return paths_.back().c_str();
  }

  TempDir dir_;
  std::deque<std::string> paths_;
  nncap_index* index_ = nullptr;
  nncap_features* queries_ = nullptr;
  nncap_corpus* refs_ = nullptr;
};

TEST(CApi, StatusStringsAndDefaults) {
  EXPECT_STREQ(nncap_status_string(NNCAP_OK), "ok");
  EXPECT_NE(std::string(nncap_version()), "");
  nncap_select_params p;
  nncap_select_params_init(&p);
  EXPECT_EQ(p.k, 80u);
  EXPECT_EQ(p.m, 200u);
  EXPECT_EQ(p.sim, NNCAP_SIM_CIDER);
}

TEST(CApi, ErrorsMapToStatusCodes) {
  nncap_features* f = nullptr;
  EXPECT_EQ(nncap_features_load("/nonexistent/q.nnfv", &f), NNCAP_ERROR_IO);
  EXPECT_NE(std::string(nncap_last_error()).find("/nonexistent/q.nnfv"), std::string::npos);
  EXPECT_EQ(f, nullptr);
  EXPECT_EQ(nncap_features_load(nullptr, &f), NNCAP_ERROR_USAGE);

  TempDir dir;
  nncap::testing::write_text(dir / "bad.nnfv", "garbage!");
  EXPECT_EQ(nncap_features_load((dir / "bad.nnfv").c_str(), &f), NNCAP_ERROR_FORMAT);

  uint64_t* values = nullptr;
  size_t count = 0;
  EXPECT_EQ(nncap_parse_grid("5:1", &values, &count), NNCAP_ERROR_USAGE);
  ASSERT_EQ(nncap_parse_grid("10:200:10", &values, &count), NNCAP_OK);
  EXPECT_EQ(count, 20u);
  EXPECT_EQ(values[19], 200u);
  nncap_free(values);
}

TEST(CApi, SimilarityMatchesKnownValue) {
  double s = 0.0;
  ASSERT_EQ(nncap_similarity(nullptr, NNCAP_SIM_BLEU, "a red car", "a blue car", &s), NNCAP_OK);
  EXPECT_NEAR(s, 0.43679023236814946, 1e-12);
  EXPECT_EQ(nncap_similarity(nullptr, NNCAP_SIM_CIDER, "a", "a", &s), NNCAP_ERROR_USAGE);
}

TEST_F(CApiTest, SelectWritesOneRecordPerQuery) {
  uint64_t n = 0;
  ASSERT_EQ(nncap_index_size(index_, &n), NNCAP_OK);
  EXPECT_EQ(n, 180u);

  nncap_select_params p;
  nncap_select_params_init(&p);
  p.k = 10;
  p.m = 20;
  p.threads = 2;
  char* out = nullptr;
  ASSERT_EQ(nncap_select(index_, queries_, &p, &out), NNCAP_OK) << nncap_last_error();
  std::istringstream lines(take(out));
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["image_id"], 10001 + static_cast<int>(count));
    EXPECT_EQ(j["k"], 10);
    ++count;
  }
  EXPECT_EQ(count, 100u);

  p.k = 1000;
  EXPECT_EQ(nncap_select(index_, queries_, &p, &out), NNCAP_ERROR_USAGE);
}

TEST_F(CApiTest, EvaluateSweepAndBins) {
  nncap_select_params p;
  nncap_select_params_init(&p);
  p.k = 10;
  p.m = 20;
  char* report = nullptr;
  ASSERT_EQ(nncap_evaluate(index_, queries_, refs_, &p, 3, &report), NNCAP_OK) << nncap_last_error();
  const auto eval = nlohmann::json::parse(take(report));
  EXPECT_EQ(eval["n_references_used"], 3);
  EXPECT_GT(eval["bleu4"].get<double>(), 0.0);

  const uint64_t ks[] = {5, 10};
  const uint64_t ms[] = {10, 20};
  nncap_sweep_params sp{ks, 2, ms, 2, NNCAP_SIM_CIDER, NNCAP_SIM_BLEU, 5, 1};
  char* csv = nullptr;
  ASSERT_EQ(nncap_sweep(index_, queries_, refs_, &sp, &report, &csv), NNCAP_OK) << nncap_last_error();
  EXPECT_EQ(nlohmann::json::parse(take(report))["grid"].size(), 4u);
  EXPECT_EQ(take(csv).rfind("k,m,metric\n", 0), 0u);

  nncap_bins_params bp{p, 50, 10, 5};
  ASSERT_EQ(nncap_bins(index_, queries_, refs_, &bp, &report, nullptr), NNCAP_OK) << nncap_last_error();
  EXPECT_EQ(nlohmann::json::parse(take(report))["bins"].size(), 10u);
}

}  // namespace
