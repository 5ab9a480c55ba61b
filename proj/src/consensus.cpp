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

#include "nncap/consensus.hpp"

#include <algorithm>
#include <functional>

#include <json.hpp>

#include "nncap/error.hpp"
#include "nncap/parallel.hpp"

namespace nncap {
namespace {

void require_candidates(const CandidateSet& candidates, const SimilarityMatrix& sims) {
  if (candidates.empty()) throw UsageError("consensus over an empty candidate set");
  if (sims.size() != candidates.size()) {
    throw UsageError("similarity matrix does not match the candidate set");
  }
}

ConsensusResult make_result(const CandidateSet& candidates, std::size_t winner,
                            std::vector<double> scores) {
  ConsensusResult result;
  result.winner = candidates[winner].caption;
  result.source_image_id = candidates[winner].source_image_id;
  result.winner_index = winner;
  result.score = scores[winner];
  result.per_candidate_scores.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    result.per_candidate_scores.emplace_back(candidates[i].caption.caption_id, scores[i]);
  }
  return result;
}

std::size_t first_argmax(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

}  // namespace

void ConsensusConfig::validate() const {
  if (k == 0) throw UsageError("k must be at least 1");
  if (m == 0) throw UsageError("m must be at least 1");
  sim.validate();
}

CandidateSet pool_candidates(const NeighborList& neighbors, const CaptionCorpus& corpus) {
  CandidateSet set;
  for (std::size_t rank = 0; rank < neighbors.size(); ++rank) {
    const Neighbor& nb = neighbors[rank];
    if (!corpus.contains(nb.image_id)) {
      throw UsageError("neighbor image " + std::to_string(nb.image_id) +
                       " has no captions in the corpus");
    }
    for (const Caption& caption : corpus.captions_of(nb.image_id)) {
      set.candidates.push_back({caption, nb.image_id, rank, nb.similarity});
    }
  }
  return set;
}

SimilarityMatrix::SimilarityMatrix(std::size_t n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (values_.size() != n_ * n_) throw UsageError("similarity matrix must be n x n");
}

SimilarityMatrix SimilarityMatrix::from_function(
    std::size_t n, const std::function<double(std::size_t, std::size_t)>& sim) {
  std::vector<double> values(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) values[i * n + j] = sim(i, j);
    }
  }
  return SimilarityMatrix(n, std::move(values));
}

SimilarityMatrix SimilarityMatrix::compute(const CandidateSet& candidates,
                                           const SimilarityKind& kind, const DfTable* df,
                                           unsigned threads) {
  const std::size_t n = candidates.size();
  std::vector<double> values(n * n, 0.0);
  if (kind.type == SimilarityType::kBleu) {
    std::vector<NGramProfile> profiles;
    profiles.reserve(n);
    for (const auto& c : candidates.candidates) profiles.emplace_back(c.caption.tokens);
    parallel_for(n, threads, [&](std::size_t i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) values[i * n + j] = sim_bleu(profiles[i], profiles[j]);
      }
    });
  } else {
    if (df == nullptr) throw UsageError("CIDEr-D similarity requires a df table");
    kind.validate();
    std::vector<TfIdfVector> vectors;
    vectors.reserve(n);
    for (const auto& c : candidates.candidates) {
      vectors.emplace_back(NGramProfile(c.caption.tokens), *df);
    }
    parallel_for(n, threads, [&](std::size_t i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) values[i * n + j] = sim_ciderd(vectors[i], vectors[j], kind);
      }
    });
  }
  return SimilarityMatrix(n, std::move(values));
}

SimilarityMatrix SimilarityMatrix::leading_block(std::size_t n) const {
  if (n > n_) throw UsageError("leading block larger than matrix");
  std::vector<double> values(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(i * n_), n,
                values.begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  return SimilarityMatrix(n, std::move(values));
}

PeerScoreTable::PeerScoreTable(const SimilarityMatrix& sims)
    : n_(sims.size()), prefix_(n_ * n_, 0.0) {
  std::vector<double> row;
  row.reserve(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n_; ++j) {
      if (j != i) row.push_back(sims(i, j));
    }
    std::sort(row.begin(), row.end(), std::greater<>());
    double running = 0.0;
    double* out = prefix_.data() + i * n_;
    out[0] = 0.0;
    for (std::size_t t = 0; t < row.size(); ++t) {
      running += row[t];
      out[t + 1] = running;
    }
  }
}

double PeerScoreTable::top_sum(std::size_t i, std::size_t m) const {
  return prefix_[i * n_ + std::min(m, n_ - 1)];
}

std::size_t PeerScoreTable::best(std::size_t m) const {
  std::size_t winner = 0;
  for (std::size_t i = 1; i < n_; ++i) {
    if (top_sum(i, m) > top_sum(winner, m)) winner = i;
  }
  return winner;
}

ConsensusResult consensus_full(const CandidateSet& candidates, const SimilarityMatrix& sims) {
  require_candidates(candidates, sims);
  const std::size_t n = candidates.size();
  std::vector<double> scores(n, 0.0);
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back(sims(i, j));
    }
    std::sort(row.begin(), row.end(), std::greater<>());
    double total = 0.0;
    for (double v : row) total += v;
    scores[i] = total;
  }
  const std::size_t winner = first_argmax(scores);
  return make_result(candidates, winner, std::move(scores));
}

ConsensusResult consensus_topm(const CandidateSet& candidates, const SimilarityMatrix& sims,
                               std::size_t m) {
  require_candidates(candidates, sims);
  if (m == 0) throw UsageError("m must be at least 1");
  const PeerScoreTable table(sims);
  std::vector<double> scores(candidates.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = table.top_sum(i, m);
  const std::size_t winner = first_argmax(scores);
  return make_result(candidates, winner, std::move(scores));
}

ConsensusResult select_caption(std::span<const float> query, const FeatureStore& store,
                               const CaptionCorpus& corpus, const DfTable& df,
                               const ConsensusConfig& cfg, unsigned threads) {
  cfg.validate();
  const NeighborList neighbors = knn(query, store, cfg.k, threads);
  const CandidateSet candidates = pool_candidates(neighbors, corpus);
  const SimilarityMatrix sims = SimilarityMatrix::compute(candidates, cfg.sim, &df, threads);
  return consensus_topm(candidates, sims, cfg.m);
}

std::string consensus_record_json(ImageId query_id, const ConsensusResult& result,
                                  const ConsensusConfig& cfg) {
  nlohmann::ordered_json record;
  record["image_id"] = query_id;
  record["caption"] = result.winner.raw_text;
  record["score"] = result.score;
  record["k"] = cfg.k;
  record["m"] = cfg.m;
  record["sim"] = cfg.sim.name();
  record["source_image_id"] = result.source_image_id;
  record["source_caption_id"] = result.winner.caption_id;
  return record.dump();
}

}  // namespace nncap
