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

#ifndef NNCAP_EXPERIMENTS_HPP_
#define NNCAP_EXPERIMENTS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nncap/consensus.hpp"
#include "nncap/corpus.hpp"
#include "nncap/features.hpp"
#include "nncap/textsim.hpp"

namespace nncap {

using References = std::vector<Tokens>;

// Corpus BLEU-4 with clipping against the per-n-gram max over references and
// a closest-reference-length brevity penalty (ties go to the shorter
// reference). Any order with zero corpus matches yields 0.
double corpus_bleu4(std::span<const Tokens> hypotheses, std::span<const References> references);

// Per hypothesis, the mean of sim_ciderd against each of its references.
std::vector<double> per_image_ciderd(std::span<const Tokens> hypotheses,
                                     std::span<const References> references, const DfTable& df,
                                     const SimilarityKind& kind = SimilarityKind::cider_d());
double corpus_ciderd(std::span<const Tokens> hypotheses, std::span<const References> references,
                     const DfTable& df, const SimilarityKind& kind = SimilarityKind::cider_d());

// Evaluation queries: feature vectors paired with reference captions.
struct QuerySet {
  std::vector<ImageId> ids;
  std::vector<std::vector<float>> features;
  std::vector<References> references;

  std::size_t size() const { return ids.size(); }
};

// Every query image must have captions in `refs`; at most `nrefs` of them
// are kept in caption order (0 keeps all).
QuerySet make_queries(const FeatureStore& query_features, const CaptionCorpus& refs,
                      std::size_t nrefs);

// Runs select_caption for every query, parallel over queries. Results are in
// query order.
std::vector<ConsensusResult> select_all(const FeatureStore& store, const CaptionCorpus& corpus,
                                        const DfTable& df, const QuerySet& queries,
                                        const ConsensusConfig& cfg, unsigned threads = 1);

struct EvalReport {
  struct PerImage {
    ImageId image_id = 0;
    std::string caption;
    double ciderd = 0.0;
  };
  double bleu4 = 0.0;
  double ciderd = 0.0;
  std::vector<PerImage> per_image;
  std::size_t n_references_used = 0;  // largest per-image reference count
  ConsensusConfig config;

  std::string to_json() const;
};

EvalReport evaluate(const FeatureStore& store, const CaptionCorpus& corpus, const DfTable& df,
                    const QuerySet& queries, const ConsensusConfig& cfg, unsigned threads = 1);

enum class Metric { kBleu4, kCiderD };
Metric parse_metric(std::string_view name);  // "bleu" or "cider"
std::string metric_name(Metric metric);

struct SweepPoint {
  std::size_t k = 0;
  std::size_t m = 0;
  double bleu4 = 0.0;
  double ciderd = 0.0;

  double value(Metric metric) const { return metric == Metric::kBleu4 ? bleu4 : ciderd; }
};

struct SweepResult {
  Metric objective = Metric::kBleu4;
  SimilarityKind sim;
  std::vector<SweepPoint> grid;  // k-major, in the order of the input grids
  SweepPoint best_bleu4;
  SweepPoint best_ciderd;

  const SweepPoint& best() const {
    return objective == Metric::kBleu4 ? best_bleu4 : best_ciderd;
  }
  std::string to_json() const;
  std::string to_csv() const;  // k,m,metric with the objective's value
};

// Picks the best point for a metric; ties go to smaller k, then smaller m.
SweepPoint best_point(std::span<const SweepPoint> grid, Metric metric);

// Evaluates every (k, m) pair on the queries. Neighbors and the pairwise
// similarity matrix are computed once per query at max(k_values); smaller k
// use the leading neighbors and the matching leading block.
SweepResult sweep(const FeatureStore& store, const CaptionCorpus& corpus, const DfTable& df,
                  const QuerySet& queries, std::span<const std::size_t> k_values,
                  std::span<const std::size_t> m_values, const SimilarityKind& sim,
                  Metric objective, unsigned threads = 1);

struct BinReport {
  struct Bin {
    std::size_t count = 0;
    double lo = 0.0;  // smallest mean NN distance in the bin
    double hi = 0.0;  // largest
    double bleu4 = 0.0;
    std::vector<ImageId> image_ids;  // ascending distance
    std::vector<double> distances;
  };
  std::size_t j = 50;
  std::vector<Bin> bins;

  std::string to_json() const;
  std::string to_csv() const;  // bin,count,lo,hi,bleu4
};

// Sorts queries by mean cosine distance to their j nearest training images
// (stable in query order) and splits them into `nbins` near-equal bins,
// earlier bins taking the remainder. Reports corpus BLEU-4 per bin.
BinReport bin_analysis(const QuerySet& queries, const FeatureStore& store,
                       const CaptionCorpus& corpus, const DfTable& df, const ConsensusConfig& cfg,
                       std::size_t j = 50, std::size_t nbins = 10, unsigned threads = 1);

}  // namespace nncap

#endif  // NNCAP_EXPERIMENTS_HPP_
