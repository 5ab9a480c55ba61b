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

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "nncap/consensus.hpp"
#include "nncap/corpus.hpp"
#include "nncap/error.hpp"
#include "nncap/experiments.hpp"
#include "nncap/features.hpp"
#include "nncap/grid.hpp"
#include "nncap/index.hpp"
#include "nncap/parallel.hpp"
#include "nncap/textsim.hpp"

struct nncap_index {
  nncap::Index index;
};

struct nncap_features {
  nncap::FeatureStore store;
};

struct nncap_corpus {
  nncap::CaptionCorpus corpus;
};

namespace {

thread_local std::string g_last_error;

int fail(nncap_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return NNCAP_OK;
  } catch (const nncap::UsageError& e) {
    return fail(NNCAP_ERROR_USAGE, e.what());
  } catch (const nncap::IoError& e) {
    return fail(NNCAP_ERROR_IO, e.what());
  } catch (const nncap::LoadError& e) {
    return fail(NNCAP_ERROR_FORMAT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(NNCAP_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NNCAP_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(NNCAP_ERROR_INTERNAL, "unknown error");
  }
}

void require(const void* ptr, const char* name) {
  if (ptr == nullptr) throw nncap::UsageError(std::string(name) + " must not be NULL");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

nncap::SimilarityKind to_kind(nncap_sim_kind kind) {
  switch (kind) {
    case NNCAP_SIM_BLEU:
      return nncap::SimilarityKind::bleu();
    case NNCAP_SIM_CIDER:
      return nncap::SimilarityKind::cider_d();
  }
  throw nncap::UsageError("unknown similarity kind " + std::to_string(static_cast<int>(kind)));
}

nncap::Metric to_metric(nncap_sim_kind kind) {
  return to_kind(kind).type == nncap::SimilarityType::kBleu ? nncap::Metric::kBleu4
                                                           : nncap::Metric::kCiderD;
}

nncap::ConsensusConfig to_config(const nncap_select_params& params) {
  nncap::ConsensusConfig cfg;
  cfg.k = params.k;
  cfg.m = params.m;
  cfg.sim = to_kind(params.sim);
  cfg.validate();
  return cfg;
}

std::vector<std::size_t> to_sizes(const uint64_t* values, size_t count, const char* name) {
  if (count > 0) require(values, name);
  return std::vector<std::size_t>(values, values + count);
}

}  // namespace

extern "C" {

void nncap_select_params_init(nncap_select_params* params) {
  if (params == nullptr) return;
  params->k = 80;
  params->m = 200;
  params->sim = NNCAP_SIM_CIDER;
  params->threads = 0;
}

const char* nncap_version(void) { return "1.0.0"; }

const char* nncap_status_string(int status) {
  switch (status) {
    case NNCAP_OK:
      return "ok";
    case NNCAP_ERROR_USAGE:
      return "usage error";
    case NNCAP_ERROR_IO:
      return "i/o error";
    case NNCAP_ERROR_FORMAT:
      return "format error";
    case NNCAP_ERROR_INTERNAL:
      return "internal error";
    default:
      return "unknown status";
  }
}

const char* nncap_last_error(void) { return g_last_error.c_str(); }

void nncap_free(void* ptr) { std::free(ptr); }

int nncap_build_index(const char* features_path, const char* captions_path, const char* out_dir,
                      char** manifest_json) {
  return guarded([&] {
    require(features_path, "features_path");
    require(captions_path, "captions_path");
    require(out_dir, "out_dir");
    const std::string manifest = nncap::build_index(features_path, captions_path, out_dir);
    if (manifest_json != nullptr) *manifest_json = copy_string(manifest);
  });
}

int nncap_index_open(const char* dir, nncap_index** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new nncap_index{nncap::open_index(dir)};
  });
}

void nncap_index_free(nncap_index* index) { delete index; }

int nncap_index_size(const nncap_index* index, uint64_t* images) {
  return guarded([&] {
    require(index, "index");
    require(images, "images");
    *images = index->index.features.size();
  });
}

int nncap_features_load(const char* path, nncap_features** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new nncap_features{nncap::load_features(path)};
  });
}

void nncap_features_free(nncap_features* features) { delete features; }

int nncap_features_count(const nncap_features* features, uint64_t* count) {
  return guarded([&] {
    require(features, "features");
    require(count, "count");
    *count = features->store.size();
  });
}

int nncap_corpus_load(const char* path, nncap_corpus** out, uint64_t* dropped) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto* corpus = new nncap_corpus{nncap::load_captions(path)};
    if (dropped != nullptr) *dropped = corpus->corpus.dropped_captions();
    *out = corpus;
  });
}

void nncap_corpus_free(nncap_corpus* corpus) { delete corpus; }

int nncap_corpus_split(const nncap_corpus* corpus, uint64_t seed, double tune_fraction,
                       const char* tune_path, const char* testval_path) {
  return guarded([&] {
    require(corpus, "corpus");
    require(tune_path, "tune_path");
    require(testval_path, "testval_path");
    const auto split = nncap::split_validation(
        corpus->corpus, nncap::SplitSpec{seed, tune_fraction, 1.0 - tune_fraction});
    nncap::save_captions(split.tune, tune_path);
    nncap::save_captions(split.testval, testval_path);
  });
}

int nncap_select(const nncap_index* index, const nncap_features* queries,
                 const nncap_select_params* params, char** jsonl) {
  return guarded([&] {
    require(index, "index");
    require(queries, "queries");
    require(params, "params");
    require(jsonl, "jsonl");
    const auto cfg = to_config(*params);
    const auto& store = queries->store;
    std::vector<nncap::ConsensusResult> results(store.size());
    const auto& idx = index->index;
    nncap::parallel_for(store.size(), params->threads, [&](std::size_t q) {
      results[q] = nncap::select_caption(store.row(q), idx.features, idx.corpus, idx.df, cfg);
    });
    std::string out;
    for (std::size_t q = 0; q < results.size(); ++q) {
      out += nncap::consensus_record_json(store.ids()[q], results[q], cfg);
      out += '\n';
    }
    *jsonl = copy_string(out);
  });
}

int nncap_evaluate(const nncap_index* index, const nncap_features* queries,
                   const nncap_corpus* refs, const nncap_select_params* params, uint64_t nrefs,
                   char** report_json) {
  return guarded([&] {
    require(index, "index");
    require(queries, "queries");
    require(refs, "refs");
    require(params, "params");
    require(report_json, "report_json");
    const auto cfg = to_config(*params);
    const auto& idx = index->index;
    const auto query_set = nncap::make_queries(queries->store, refs->corpus, nrefs);
    const auto report =
        nncap::evaluate(idx.features, idx.corpus, idx.df, query_set, cfg, params->threads);
    *report_json = copy_string(report.to_json());
  });
}

int nncap_sweep(const nncap_index* index, const nncap_features* queries, const nncap_corpus* refs,
                const nncap_sweep_params* params, char** report_json, char** csv) {
  return guarded([&] {
    require(index, "index");
    require(queries, "queries");
    require(refs, "refs");
    require(params, "params");
    require(report_json, "report_json");
    const auto k_values = to_sizes(params->k_values, params->k_count, "k_values");
    const auto m_values = to_sizes(params->m_values, params->m_count, "m_values");
    const auto& idx = index->index;
    const auto query_set = nncap::make_queries(queries->store, refs->corpus, params->nrefs);
    const auto result =
        nncap::sweep(idx.features, idx.corpus, idx.df, query_set, k_values, m_values,
                     to_kind(params->sim), to_metric(params->objective), params->threads);
    *report_json = copy_string(result.to_json());
    if (csv != nullptr) *csv = copy_string(result.to_csv());
  });
}

int nncap_bins(const nncap_index* index, const nncap_features* queries, const nncap_corpus* refs,
               const nncap_bins_params* params, char** report_json, char** csv) {
  return guarded([&] {
    require(index, "index");
    require(queries, "queries");
    require(refs, "refs");
    require(params, "params");
    require(report_json, "report_json");
    const auto cfg = to_config(params->select);
    if (params->j == 0) throw nncap::UsageError("j must be at least 1");
    const auto& idx = index->index;
    const auto query_set = nncap::make_queries(queries->store, refs->corpus, params->nrefs);
    const auto report = nncap::bin_analysis(query_set, idx.features, idx.corpus, idx.df, cfg,
                                            params->j, params->nbins, params->select.threads);
    *report_json = copy_string(report.to_json());
    if (csv != nullptr) *csv = copy_string(report.to_csv());
  });
}

int nncap_similarity(const nncap_index* index, nncap_sim_kind kind, const char* candidate,
                     const char* reference, double* out) {
  return guarded([&] {
    require(candidate, "candidate");
    require(reference, "reference");
    require(out, "out");
    const nncap::NGramProfile c(nncap::tokenize(candidate));
    const nncap::NGramProfile r(nncap::tokenize(reference));
    const auto sim = to_kind(kind);
    if (sim.type == nncap::SimilarityType::kBleu) {
      *out = nncap::sim_bleu(c, r);
    } else {
      require(index, "index");
      *out = nncap::sim_ciderd(c, r, index->index.df, sim);
    }
  });
}

int nncap_parse_grid(const char* spec, uint64_t** values, size_t* count) {
  return guarded([&] {
    require(spec, "spec");
    require(values, "values");
    require(count, "count");
    const auto parsed = nncap::parse_grid(spec);
    auto* out = static_cast<uint64_t*>(std::malloc(sizeof(uint64_t) * (parsed.size() + 1)));
    if (out == nullptr) throw std::bad_alloc();
    for (std::size_t i = 0; i < parsed.size(); ++i) out[i] = parsed[i];
    *values = out;
    *count = parsed.size();
  });
}

}  // extern "C"
