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

#include "nncap/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "nncap/error.hpp"
#include "nncap/parallel.hpp"

namespace nncap {
namespace {

using nlohmann::ordered_json;

void check_pairs(std::span<const Tokens> hypotheses, std::span<const References> references) {
  if (hypotheses.size() != references.size()) {
    throw UsageError("hypothesis and reference lists differ in length");
  }
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    if (hypotheses[i].empty()) {
      throw UsageError("hypothesis " + std::to_string(i) + " is empty");
    }
    if (references[i].empty()) {
      throw UsageError("hypothesis " + std::to_string(i) + " has no references");
    }
    for (const Tokens& ref : references[i]) {
      if (ref.empty()) throw UsageError("empty reference for hypothesis " + std::to_string(i));
    }
  }
}

std::size_t closest_ref_length(std::size_t hyp_len, const References& refs) {
  std::size_t best = refs.front().size();
  for (const Tokens& ref : refs) {
    const std::size_t len = ref.size();
    const auto diff = [&](std::size_t l) { return l > hyp_len ? l - hyp_len : hyp_len - l; };
    if (diff(len) < diff(best) || (diff(len) == diff(best) && len < best)) best = len;
  }
  return best;
}

std::vector<Tokens> winner_tokens(const std::vector<ConsensusResult>& results) {
  std::vector<Tokens> out;
  out.reserve(results.size());
  for (const auto& r : results) out.push_back(r.winner.tokens);
  return out;
}

std::size_t max_reference_count(const QuerySet& queries) {
  std::size_t most = 0;
  for (const auto& refs : queries.references) most = std::max(most, refs.size());
  return most;
}

ordered_json point_json(const SweepPoint& p) {
  return ordered_json{{"k", p.k}, {"m", p.m}, {"bleu4", p.bleu4}, {"ciderd", p.ciderd}};
}

}  // namespace

double corpus_bleu4(std::span<const Tokens> hypotheses, std::span<const References> references) {
  check_pairs(hypotheses, references);
  std::array<std::uint64_t, kMaxOrder> matches{};
  std::array<std::uint64_t, kMaxOrder> totals{};
  std::uint64_t hyp_length = 0;
  std::uint64_t ref_length = 0;

  for (std::size_t h = 0; h < hypotheses.size(); ++h) {
    const NGramProfile hyp(hypotheses[h]);
    std::vector<NGramProfile> refs;
    refs.reserve(references[h].size());
    for (const Tokens& r : references[h]) refs.emplace_back(r);

    for (int n = 1; n <= kMaxOrder; ++n) {
      totals[n - 1] += hyp.total(n);
      for (const auto& e : hyp.order(n)) {
        std::uint32_t max_ref = 0;
        for (const auto& ref : refs) max_ref = std::max(max_ref, ref.count(n, e.gram));
        matches[n - 1] += std::min(e.count, max_ref);
      }
    }
    hyp_length += hypotheses[h].size();
    ref_length += closest_ref_length(hypotheses[h].size(), references[h]);
  }

  double log_sum = 0.0;
  for (int n = 0; n < kMaxOrder; ++n) {
    if (matches[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matches[n]) / static_cast<double>(totals[n]));
  }
  const double c = static_cast<double>(hyp_length);
  const double r = static_cast<double>(ref_length);
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::exp(log_sum / kMaxOrder);
}

std::vector<double> per_image_ciderd(std::span<const Tokens> hypotheses,
                                     std::span<const References> references, const DfTable& df,
                                     const SimilarityKind& kind) {
  check_pairs(hypotheses, references);
  std::vector<double> scores(hypotheses.size());
  for (std::size_t h = 0; h < hypotheses.size(); ++h) {
    const TfIdfVector hyp(NGramProfile(hypotheses[h]), df);
    double total = 0.0;
    for (const Tokens& ref : references[h]) {
      total += sim_ciderd(hyp, TfIdfVector(NGramProfile(ref), df), kind);
    }
    scores[h] = total / static_cast<double>(references[h].size());
  }
  return scores;
}

double corpus_ciderd(std::span<const Tokens> hypotheses, std::span<const References> references,
                     const DfTable& df, const SimilarityKind& kind) {
  const auto scores = per_image_ciderd(hypotheses, references, df, kind);
  if (scores.empty()) return 0.0;
  double total = 0.0;
  for (double s : scores) total += s;
  return total / static_cast<double>(scores.size());
}

QuerySet make_queries(const FeatureStore& query_features, const CaptionCorpus& refs,
                      std::size_t nrefs) {
  QuerySet queries;
  for (std::size_t i = 0; i < query_features.size(); ++i) {
    const ImageId id = query_features.ids()[i];
    if (!refs.contains(id) || refs.captions_of(id).empty()) {
      throw UsageError("query image " + std::to_string(id) + " has no reference captions");
    }
    References r;
    for (const Caption& c : refs.captions_of(id)) {
      if (nrefs != 0 && r.size() == nrefs) break;
      r.push_back(c.tokens);
    }
    const auto row = query_features.row(i);
    queries.ids.push_back(id);
    queries.features.emplace_back(row.begin(), row.end());
    queries.references.push_back(std::move(r));
  }
  return queries;
}

std::vector<ConsensusResult> select_all(const FeatureStore& store, const CaptionCorpus& corpus,
                                        const DfTable& df, const QuerySet& queries,
                                        const ConsensusConfig& cfg, unsigned threads) {
  cfg.validate();
  std::vector<ConsensusResult> results(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t q) {
    results[q] = select_caption(queries.features[q], store, corpus, df, cfg);
  });
  return results;
}

EvalReport evaluate(const FeatureStore& store, const CaptionCorpus& corpus, const DfTable& df,
                    const QuerySet& queries, const ConsensusConfig& cfg, unsigned threads) {
  if (queries.size() == 0) throw UsageError("no evaluation queries");
  const auto results = select_all(store, corpus, df, queries, cfg, threads);
  const auto hyps = winner_tokens(results);
  const auto cider = per_image_ciderd(hyps, queries.references, df);

  EvalReport report;
  report.config = cfg;
  report.bleu4 = corpus_bleu4(hyps, queries.references);
  report.ciderd = corpus_ciderd(hyps, queries.references, df);
  report.n_references_used = max_reference_count(queries);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    report.per_image.push_back({queries.ids[q], results[q].winner.raw_text, cider[q]});
  }
  return report;
}

std::string EvalReport::to_json() const {
  ordered_json doc;
  doc["bleu4"] = bleu4;
  doc["bleu4_x100"] = bleu4 * 100.0;
  doc["ciderd"] = ciderd;
  doc["units"] = {{"bleu4", "fraction in [0, 1]"},
                  {"bleu4_x100", "percent"},
                  {"ciderd", "mean per-image CIDEr-D, per-pair scale 10"}};
  doc["queries"] = per_image.size();
  doc["n_references_used"] = n_references_used;
  doc["k"] = config.k;
  doc["m"] = config.m;
  doc["sim"] = config.sim.name();
  ordered_json images = ordered_json::array();
  for (const auto& p : per_image) {
    images.push_back({{"image_id", p.image_id}, {"caption", p.caption}, {"ciderd", p.ciderd}});
  }
  doc["per_image"] = std::move(images);
  return doc.dump(2) + "\n";
}

Metric parse_metric(std::string_view name) {
  if (name == "bleu") return Metric::kBleu4;
  if (name == "cider") return Metric::kCiderD;
  throw UsageError("unknown metric '" + std::string(name) + "', expected one of {bleu, cider}");
}

std::string metric_name(Metric metric) { return metric == Metric::kBleu4 ? "bleu" : "cider"; }

SweepPoint best_point(std::span<const SweepPoint> grid, Metric metric) {
  if (grid.empty()) throw UsageError("empty sweep grid");
  const SweepPoint* best = &grid.front();
  for (const SweepPoint& p : grid) {
    const double v = p.value(metric), b = best->value(metric);
    if (v > b || (v == b && (p.k < best->k || (p.k == best->k && p.m < best->m)))) best = &p;
  }
  return *best;
}

SweepResult sweep(const FeatureStore& store, const CaptionCorpus& corpus, const DfTable& df,
                  const QuerySet& queries, std::span<const std::size_t> k_values,
                  std::span<const std::size_t> m_values, const SimilarityKind& sim,
                  Metric objective, unsigned threads) {
  if (k_values.empty() || m_values.empty()) throw UsageError("sweep grids must be non-empty");
  if (queries.size() == 0) throw UsageError("no tuning queries");
  for (std::size_t k : k_values) {
    if (k == 0) throw UsageError("k values must be at least 1");
  }
  for (std::size_t m : m_values) {
    if (m == 0) throw UsageError("m values must be at least 1");
  }
  sim.validate();
  const std::size_t k_max = *std::max_element(k_values.begin(), k_values.end());
  const std::size_t nk = k_values.size(), nm = m_values.size();

  // chosen[q][ki * nm + mi] = winning caption tokens for that grid point.
  std::vector<std::vector<const Tokens*>> chosen(queries.size());
  std::vector<CandidateSet> pools(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t q) {
    const NeighborList neighbors = knn(queries.features[q], store, k_max);
    pools[q] = pool_candidates(neighbors, corpus);
    const CandidateSet& pool = pools[q];
    const SimilarityMatrix full = SimilarityMatrix::compute(pool, sim, &df);

    chosen[q].resize(nk * nm);
    for (std::size_t ki = 0; ki < nk; ++ki) {
      std::size_t n = 0;
      while (n < pool.size() && pool[n].neighbor_rank < k_values[ki]) ++n;
      if (n == 0) {
        throw UsageError("query " + std::to_string(queries.ids[q]) +
                         " has no candidate captions for k=" + std::to_string(k_values[ki]));
      }
      const PeerScoreTable table(full.leading_block(n));
      for (std::size_t mi = 0; mi < nm; ++mi) {
        chosen[q][ki * nm + mi] = &pool[table.best(m_values[mi])].caption.tokens;
      }
    }
  });

  SweepResult result;
  result.objective = objective;
  result.sim = sim;
  std::vector<Tokens> hyps(queries.size());
  for (std::size_t ki = 0; ki < nk; ++ki) {
    for (std::size_t mi = 0; mi < nm; ++mi) {
      for (std::size_t q = 0; q < queries.size(); ++q) hyps[q] = *chosen[q][ki * nm + mi];
      SweepPoint point;
      point.k = k_values[ki];
      point.m = m_values[mi];
      point.bleu4 = corpus_bleu4(hyps, queries.references);
      point.ciderd = corpus_ciderd(hyps, queries.references, df);
      result.grid.push_back(point);
    }
  }
  result.best_bleu4 = best_point(result.grid, Metric::kBleu4);
  result.best_ciderd = best_point(result.grid, Metric::kCiderD);
  return result;
}

std::string SweepResult::to_json() const {
  ordered_json doc;
  doc["objective"] = metric_name(objective);
  doc["sim"] = sim.name();
  doc["best"] = point_json(best());
  doc["best_by_metric"] = {{"bleu", point_json(best_bleu4)}, {"cider", point_json(best_ciderd)}};
  ordered_json points = ordered_json::array();
  for (const auto& p : grid) points.push_back(point_json(p));
  doc["grid"] = std::move(points);
  return doc.dump(2) + "\n";
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "k,m,metric\n";
  for (const auto& p : grid) out << p.k << ',' << p.m << ',' << p.value(objective) << '\n';
  return out.str();
}

BinReport bin_analysis(const QuerySet& queries, const FeatureStore& store,
                       const CaptionCorpus& corpus, const DfTable& df, const ConsensusConfig& cfg,
                       std::size_t j, std::size_t nbins, unsigned threads) {
  if (nbins == 0) throw UsageError("number of bins must be positive");
  if (queries.size() < nbins) {
    throw UsageError("bin analysis needs at least " + std::to_string(nbins) + " queries, got " +
                     std::to_string(queries.size()));
  }
  cfg.validate();
  std::vector<double> distances(queries.size());
  std::vector<ConsensusResult> results(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t q) {
    distances[q] = mean_nn_distance(queries.features[q], store, j);
    results[q] = select_caption(queries.features[q], store, corpus, df, cfg);
  });

  std::vector<std::size_t> order(queries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });

  BinReport report;
  report.j = j;
  const std::size_t base = queries.size() / nbins, extra = queries.size() % nbins;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < nbins; ++b) {
    const std::size_t count = base + (b < extra ? 1 : 0);
    BinReport::Bin bin;
    bin.count = count;
    std::vector<Tokens> hyps;
    std::vector<References> refs;
    for (std::size_t t = 0; t < count; ++t, ++pos) {
      const std::size_t q = order[pos];
      bin.image_ids.push_back(queries.ids[q]);
      bin.distances.push_back(distances[q]);
      hyps.push_back(results[q].winner.tokens);
      refs.push_back(queries.references[q]);
    }
    bin.lo = bin.distances.front();
    bin.hi = bin.distances.back();
    bin.bleu4 = corpus_bleu4(hyps, refs);
    report.bins.push_back(std::move(bin));
  }
  return report;
}

std::string BinReport::to_json() const {
  ordered_json doc;
  doc["j"] = j;
  doc["nbins"] = bins.size();
  ordered_json list = ordered_json::array();
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const Bin& bin = bins[b];
    list.push_back({{"bin", b + 1},
                    {"count", bin.count},
                    {"lo", bin.lo},
                    {"hi", bin.hi},
                    {"bleu4", bin.bleu4},
                    {"bleu4_x100", bin.bleu4 * 100.0},
                    {"image_ids", bin.image_ids}});
  }
  doc["bins"] = std::move(list);
  return doc.dump(2) + "\n";
}

std::string BinReport::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "bin,count,lo,hi,bleu4\n";
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const Bin& bin = bins[b];
    out << b + 1 << ',' << bin.count << ',' << bin.lo << ',' << bin.hi << ',' << bin.bleu4 << '\n';
  }
  return out.str();
}

}  // namespace nncap
