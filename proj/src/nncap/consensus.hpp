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

#ifndef NNCAP_CONSENSUS_HPP_
#define NNCAP_CONSENSUS_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nncap/corpus.hpp"
#include "nncap/features.hpp"
#include "nncap/textsim.hpp"

namespace nncap {

struct Candidate {
  Caption caption;
  ImageId source_image_id = 0;
  std::size_t neighbor_rank = 0;  // 0-based rank of the source image
  double neighbor_similarity = 0.0;
};

// Pooled captions of the k nearest images, ordered by (neighbor rank,
// caption ordinal). Duplicate caption strings stay distinct members.
struct CandidateSet {
  std::vector<Candidate> candidates;

  std::size_t size() const { return candidates.size(); }
  bool empty() const { return candidates.empty(); }
  const Candidate& operator[](std::size_t i) const { return candidates[i]; }
};

struct ConsensusConfig {
  std::size_t k = 80;
  std::size_t m = 200;
  SimilarityKind sim = SimilarityKind::cider_d();

  void validate() const;
};

struct ConsensusResult {
  Caption winner;
  ImageId source_image_id = 0;
  std::size_t winner_index = 0;  // position in the candidate set
  double score = 0.0;
  std::vector<std::pair<CaptionId, double>> per_candidate_scores;
};

// Throws UsageError if a neighbor is missing from the corpus.
CandidateSet pool_candidates(const NeighborList& neighbors, const CaptionCorpus& corpus);

// Dense n x n table of Sim(candidate i, candidate j). The diagonal is never
// read by the consensus rules.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t n, std::vector<double> values);

  // BLEU needs no df table; CIDEr-D requires one.
  static SimilarityMatrix compute(const CandidateSet& candidates, const SimilarityKind& kind,
                                  const DfTable* df, unsigned threads = 1);
  static SimilarityMatrix from_function(std::size_t n,
                                        const std::function<double(std::size_t, std::size_t)>& sim);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  // Top-left n x n block.
  SimilarityMatrix leading_block(std::size_t n) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

// Every candidate's peer similarities (self excluded) sorted descending with
// running sums. Sums are always accumulated from the largest value down, so
// a score depends only on the multiset of peer values that enter it.
class PeerScoreTable {
 public:
  explicit PeerScoreTable(const SimilarityMatrix& sims);

  std::size_t size() const { return n_; }
  // Sum of the min(m, n - 1) largest peer similarities of candidate i.
  double top_sum(std::size_t i, std::size_t m) const;
  // First candidate maximizing top_sum(., m).
  std::size_t best(std::size_t m) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> prefix_;  // n rows of n entries; prefix_[i*n + t] = sum of t largest
};

// Argmax over c of the sum of Sim(c, c') over all c' != c.
ConsensusResult consensus_full(const CandidateSet& candidates, const SimilarityMatrix& sims);

// Argmax over c of the best size-m peer subset, i.e. the sum of its m largest
// peer similarities. m is clamped to n - 1.
ConsensusResult consensus_topm(const CandidateSet& candidates, const SimilarityMatrix& sims,
                               std::size_t m);

// knn -> pool_candidates -> consensus_topm.
ConsensusResult select_caption(std::span<const float> query, const FeatureStore& store,
                               const CaptionCorpus& corpus, const DfTable& df,
                               const ConsensusConfig& cfg, unsigned threads = 1);

// One JSON object (no trailing newline) describing the result for a query.
std::string consensus_record_json(ImageId query_id, const ConsensusResult& result,
                                  const ConsensusConfig& cfg);

}  // namespace nncap

#endif  // NNCAP_CONSENSUS_HPP_
