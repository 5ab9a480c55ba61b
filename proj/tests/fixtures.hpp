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

// Synthetic training/query fixtures shared by the unit, integration and
// acceptance tests.

#ifndef NNCAP_TESTS_FIXTURES_HPP_
#define NNCAP_TESTS_FIXTURES_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nncap/corpus.hpp"
#include "nncap/experiments.hpp"
#include "nncap/features.hpp"
#include "nncap/textsim.hpp"

namespace nncap::testing {

// Three well-separated feature clusters, 60 training images each, every image
// carrying 5 captions generated from its cluster's template. About 5% of the
// training captions are replaced by captions from another cluster.
struct ClusterFixture {
  FeatureStore train;
  CaptionCorpus train_corpus;
  DfTable df;
  FeatureStore queries;         // 100 held-out queries, clusters round-robin
  CaptionCorpus query_refs;     // 5 template captions per query
  std::vector<int> query_cluster;
  std::size_t outlier_captions = 0;

  // A query far from every cluster, with references from an unseen theme.
  ImageId far_query_id = 0;
  std::vector<float> far_query;
  CaptionCorpus far_query_refs;
};

ClusterFixture make_cluster_fixture(std::uint64_t seed = 42);

// Cluster whose template produced a caption, or -1 for none.
int caption_cluster(const Tokens& tokens);

// Caption lists for the outlier-sensitivity construction: a tight majority
// group, a diffuse outlier group sharing a phrase, and one bridge caption
// that overlaps both.
std::vector<std::string> adversarial_majority();
std::vector<std::string> adversarial_outliers();
std::string adversarial_bridge();

// Neighborhoods of 10 training images (5 captions each) built from the
// adversarial caption lists, one per region along its own feature axis, plus
// one tuning query per region whose references are majority-style captions.
struct AdversarialFixture {
  FeatureStore train;
  CaptionCorpus train_corpus;
  DfTable df;
  FeatureStore queries;
  CaptionCorpus query_refs;
};

AdversarialFixture make_adversarial_fixture(std::size_t regions = 3);

// Merges query features and references into an evaluation set.
QuerySet queries_of(const FeatureStore& features, const CaptionCorpus& refs,
                    std::size_t nrefs = 0);

// Captions of 3..9 tokens over a 12-word vocabulary.
Tokens random_caption(std::mt19937_64& rng, std::size_t min_len = 3, std::size_t max_len = 9);

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace nncap::testing

#endif  // NNCAP_TESTS_FIXTURES_HPP_
