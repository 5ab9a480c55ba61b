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

/*
 * nncap: consensus caption selection over nearest-neighbor training images.
 *
 * Plain C interface. Objects are opaque handles created by *_open / *_load
 * and released by the matching *_free. Every function returns an
 * nncap_status; on failure a message for the calling thread is available
 * from nncap_last_error(). Strings returned through char** out-parameters
 * are heap allocated and must be released with nncap_free().
 */

#ifndef NNCAP_NNCAP_H_
#define NNCAP_NNCAP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(NNCAP_BUILDING_LIBRARY)
#    define NNCAP_API __declspec(dllexport)
#  else
#    define NNCAP_API __declspec(dllimport)
#  endif
#else
#  define NNCAP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  NNCAP_OK = 0,
  NNCAP_ERROR_USAGE = 1,    /* invalid argument or violated precondition */
  NNCAP_ERROR_IO = 2,       /* file could not be opened, read or written */
  NNCAP_ERROR_FORMAT = 3,   /* malformed file or invariant violation at load */
  NNCAP_ERROR_INTERNAL = 4  /* unexpected failure */
} nncap_status;

typedef enum {
  NNCAP_SIM_BLEU = 0,
  NNCAP_SIM_CIDER = 1
} nncap_sim_kind;

typedef struct nncap_index nncap_index;        /* training features, captions, df */
typedef struct nncap_features nncap_features;  /* query feature vectors */
typedef struct nncap_corpus nncap_corpus;      /* caption annotations */

typedef struct {
  uint64_t k;             /* neighbors per query, >= 1 */
  uint64_t m;             /* peer subset size, >= 1; clamped to n - 1 */
  nncap_sim_kind sim;
  uint32_t threads;       /* 0 = one per hardware thread */
} nncap_select_params;

typedef struct {
  const uint64_t* k_values;
  size_t k_count;
  const uint64_t* m_values;
  size_t m_count;
  nncap_sim_kind sim;       /* pairwise similarity used for selection */
  nncap_sim_kind objective; /* metric used to pick the best grid point */
  uint64_t nrefs;           /* references per query, 0 = all */
  uint32_t threads;
} nncap_sweep_params;

typedef struct {
  nncap_select_params select;
  uint64_t j;      /* neighbors in the mean-distance statistic */
  uint64_t nbins;
  uint64_t nrefs;
} nncap_bins_params;

/* Defaults: k = 80, m = 200, CIDEr-D, threads = 0. */
NNCAP_API void nncap_select_params_init(nncap_select_params* params);

NNCAP_API const char* nncap_version(void);
NNCAP_API const char* nncap_status_string(int status);
NNCAP_API const char* nncap_last_error(void);
NNCAP_API void nncap_free(void* ptr);

/* Writes features.nnfv, captions.json, df.nndf and manifest.json into
 * out_dir. manifest_json may be NULL. */
NNCAP_API int nncap_build_index(const char* features_path, const char* captions_path,
                                const char* out_dir, char** manifest_json);

NNCAP_API int nncap_index_open(const char* dir, nncap_index** out);
NNCAP_API void nncap_index_free(nncap_index* index);
NNCAP_API int nncap_index_size(const nncap_index* index, uint64_t* images);

/* NNFV binary, or JSON lines when the path ends in ".jsonl". */
NNCAP_API int nncap_features_load(const char* path, nncap_features** out);
NNCAP_API void nncap_features_free(nncap_features* features);
NNCAP_API int nncap_features_count(const nncap_features* features, uint64_t* count);

/* COCO caption JSON, or JSON lines when the path ends in ".jsonl".
 * dropped (may be NULL) receives the number of captions without tokens. */
NNCAP_API int nncap_corpus_load(const char* path, nncap_corpus** out, uint64_t* dropped);
NNCAP_API void nncap_corpus_free(nncap_corpus* corpus);

/* Image-level split; writes both halves as COCO caption JSON. */
NNCAP_API int nncap_corpus_split(const nncap_corpus* corpus, uint64_t seed,
                                 double tune_fraction, const char* tune_path,
                                 const char* testval_path);

/* One JSON record per query, newline-terminated, in query order. */
NNCAP_API int nncap_select(const nncap_index* index, const nncap_features* queries,
                           const nncap_select_params* params, char** jsonl);

/* Corpus BLEU-4 and CIDEr-D of the selected captions against refs. */
NNCAP_API int nncap_evaluate(const nncap_index* index, const nncap_features* queries,
                             const nncap_corpus* refs, const nncap_select_params* params,
                             uint64_t nrefs, char** report_json);

/* csv may be NULL. */
NNCAP_API int nncap_sweep(const nncap_index* index, const nncap_features* queries,
                          const nncap_corpus* refs, const nncap_sweep_params* params,
                          char** report_json, char** csv);

NNCAP_API int nncap_bins(const nncap_index* index, const nncap_features* queries,
                         const nncap_corpus* refs, const nncap_bins_params* params,
                         char** report_json, char** csv);

/* Similarity of a candidate sentence against one reference sentence.
 * index may be NULL for BLEU; CIDEr-D uses the index df table. */
NNCAP_API int nncap_similarity(const nncap_index* index, nncap_sim_kind kind,
                               const char* candidate, const char* reference, double* out);

/* Parses "lo:hi:step" ranges and comma lists into a heap array of values. */
NNCAP_API int nncap_parse_grid(const char* spec, uint64_t** values, size_t* count);

#ifdef __cplusplus
}
#endif

#endif /* NNCAP_NNCAP_H_ */
