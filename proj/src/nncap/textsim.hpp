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

#ifndef NNCAP_TEXTSIM_HPP_
#define NNCAP_TEXTSIM_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nncap/corpus.hpp"

namespace nncap {

inline constexpr int kMaxOrder = 4;

// N-gram keys are the tokens joined by the ASCII unit separator.
inline constexpr char kTokenSeparator = '\x1f';

std::string ngram_key(std::span<const std::string> tokens);

struct NGramCount {
  std::size_t hash = 0;
  std::string gram;
  std::uint32_t count = 0;
};

// Sliding-window 1..4-gram counts of one token sequence. Each order is kept
// sorted by (hash, gram) so two profiles intersect with a linear merge.
class NGramProfile {
 public:
  NGramProfile() = default;
  explicit NGramProfile(const Tokens& tokens);

  std::size_t token_length() const { return token_length_; }
  // n in [1, kMaxOrder].
  std::span<const NGramCount> order(int n) const { return orders_[n - 1]; }
  // Number of n-gram positions, max(0, token_length - n + 1).
  std::size_t total(int n) const;
  std::uint32_t count(int n, std::string_view gram) const;

 private:
  std::array<std::vector<NGramCount>, kMaxOrder> orders_;
  std::size_t token_length_ = 0;
};

inline NGramProfile ngram_profile(const Tokens& tokens) { return NGramProfile(tokens); }

// Document frequencies of n-grams over a caption collection, one caption per
// document.
class DfTable {
 public:
  using Map = std::unordered_map<std::string, std::uint64_t>;

  DfTable() = default;
  // Throws LoadError if doc_count is 0 or any df lies outside [1, doc_count].
  DfTable(std::uint64_t doc_count, std::array<Map, kMaxOrder> df);

  std::uint64_t doc_count() const { return doc_count_; }
  // 0 for an unseen n-gram.
  std::uint64_t df(int n, std::string_view gram) const;
  // log(doc_count / df); unseen n-grams get df = 1.
  double idf(int n, std::string_view gram) const;
  const Map& entries(int n) const { return df_[n - 1]; }

  bool operator==(const DfTable&) const = default;

 private:
  std::uint64_t doc_count_ = 0;
  std::array<Map, kMaxOrder> df_;
};

// Throws UsageError on an empty corpus.
DfTable build_df(const CaptionCorpus& corpus);
DfTable build_df(std::span<const Tokens> documents);

// "NNDF" binary sidecar; entries of each order are written in byte order.
std::string df_to_bytes(const DfTable& table);
void save_df(const DfTable& table, const std::filesystem::path& path);
DfTable load_df(const std::filesystem::path& path);

enum class SimilarityType { kBleu, kCiderD };

struct SimilarityKind {
  SimilarityType type = SimilarityType::kCiderD;
  double sigma = 6.0;   // CIDEr-D length penalty width
  double scale = 10.0;  // CIDEr-D output scale

  static SimilarityKind bleu() { return {SimilarityType::kBleu, 6.0, 10.0}; }
  static SimilarityKind cider_d(double sigma = 6.0, double scale = 10.0) {
    return {SimilarityType::kCiderD, sigma, scale};
  }
  // "bleu" or "cider"; throws UsageError otherwise.
  static SimilarityKind parse(std::string_view name);
  std::string name() const;
  void validate() const;
};

// Smoothed sentence BLEU of candidate `c` against the single reference `ref`.
// Orders without candidate n-grams are skipped; an order with no clipped
// matches uses precision 1 / (2 * total_n).
double sim_bleu(const NGramProfile& c, const NGramProfile& ref);

// Profile plus idf weights aligned with each order's entries.
class TfIdfVector {
 public:
  TfIdfVector(NGramProfile profile, const DfTable& df);

  const NGramProfile& profile() const { return profile_; }
  std::span<const double> idf(int n) const { return idf_[n - 1]; }
  double norm(int n) const { return norms_[n - 1]; }

 private:
  NGramProfile profile_;
  std::array<std::vector<double>, kMaxOrder> idf_;
  std::array<double, kMaxOrder> norms_{};
};

// CIDEr-D of candidate `c` against one reference: per-order cosine of tf-idf
// vectors with the candidate's counts clipped to the reference's in the
// numerator, averaged over orders 1..4, times a Gaussian length penalty and
// kind.scale.
double sim_ciderd(const NGramProfile& c, const NGramProfile& ref, const DfTable& df,
                  const SimilarityKind& kind);
double sim_ciderd(const TfIdfVector& c, const TfIdfVector& ref, const SimilarityKind& kind);

}  // namespace nncap

#endif  // NNCAP_TEXTSIM_HPP_
