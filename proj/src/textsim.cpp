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

#include "nncap/textsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_set>

#include "nncap/error.hpp"
#include "nncap/io_util.hpp"

namespace nncap {
namespace {

constexpr char kDfMagic[4] = {'N', 'N', 'D', 'F'};
constexpr std::uint32_t kDfVersion = 1;

bool ngram_less(const NGramCount& a, const NGramCount& b) {
  if (a.hash != b.hash) return a.hash < b.hash;
  return a.gram < b.gram;
}

// Calls fn(i, j) for every n-gram present in both sorted lists.
template <typename Fn>
void for_each_shared(std::span<const NGramCount> a, std::span<const NGramCount> b, Fn&& fn) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (ngram_less(a[i], b[j])) {
      ++i;
    } else if (ngram_less(b[j], a[i])) {
      ++j;
    } else {
      fn(i, j);
      ++i;
      ++j;
    }
  }
}

void require_nonempty(const NGramProfile& p, const char* what) {
  if (p.token_length() == 0) {
    throw UsageError(std::string(what) + ": caption has no tokens");
  }
}

}  // namespace

std::string ngram_key(std::span<const std::string> tokens) {
  std::string key;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) key.push_back(kTokenSeparator);
    key += tokens[i];
  }
  return key;
}

NGramProfile::NGramProfile(const Tokens& tokens) : token_length_(tokens.size()) {
  const std::hash<std::string> hasher;
  for (int n = 1; n <= kMaxOrder; ++n) {
    if (tokens.size() < static_cast<std::size_t>(n)) break;
    std::unordered_map<std::string, std::uint32_t> counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      ++counts[ngram_key(std::span<const std::string>(tokens).subspan(i, n))];
    }
    auto& entries = orders_[n - 1];
    entries.reserve(counts.size());
    for (auto& [gram, count] : counts) {
      entries.push_back({hasher(gram), gram, count});
    }
    std::sort(entries.begin(), entries.end(), ngram_less);
  }
}

std::size_t NGramProfile::total(int n) const {
  return token_length_ >= static_cast<std::size_t>(n) ? token_length_ - n + 1 : 0;
}

std::uint32_t NGramProfile::count(int n, std::string_view gram) const {
  for (const auto& e : orders_[n - 1]) {
    if (e.gram == gram) return e.count;
  }
  return 0;
}

DfTable::DfTable(std::uint64_t doc_count, std::array<Map, kMaxOrder> df)
    : doc_count_(doc_count), df_(std::move(df)) {
  if (doc_count_ == 0) throw LoadError("df table must cover at least one document");
  for (const auto& order : df_) {
    for (const auto& [gram, value] : order) {
      if (value == 0 || value > doc_count_) {
        throw LoadError("df value " + std::to_string(value) + " out of range [1, " +
                        std::to_string(doc_count_) + "]");
      }
    }
  }
}

std::uint64_t DfTable::df(int n, std::string_view gram) const {
  const auto& order = df_[n - 1];
  auto it = order.find(std::string(gram));
  return it == order.end() ? 0 : it->second;
}

double DfTable::idf(int n, std::string_view gram) const {
  const std::uint64_t value = std::max<std::uint64_t>(df(n, gram), 1);
  return std::log(static_cast<double>(doc_count_) / static_cast<double>(value));
}

DfTable build_df(std::span<const Tokens> documents) {
  if (documents.empty()) throw UsageError("build_df: corpus has no captions");
  std::array<DfTable::Map, kMaxOrder> df;
  for (const Tokens& doc : documents) {
    const NGramProfile profile(doc);
    for (int n = 1; n <= kMaxOrder; ++n) {
      for (const auto& e : profile.order(n)) ++df[n - 1][e.gram];
    }
  }
  return DfTable(documents.size(), std::move(df));
}

DfTable build_df(const CaptionCorpus& corpus) {
  std::vector<Tokens> documents;
  documents.reserve(corpus.caption_count());
  for (const Caption* caption : corpus.all_captions()) documents.push_back(caption->tokens);
  return build_df(documents);
}

std::string df_to_bytes(const DfTable& table) {
  std::ostringstream out(std::ios::binary);
  out.write(kDfMagic, 4);
  io::write_u32(out, kDfVersion);
  io::write_u64(out, table.doc_count());
  for (int n = 1; n <= kMaxOrder; ++n) {
    std::vector<std::pair<std::string_view, std::uint64_t>> sorted(table.entries(n).begin(),
                                                                    table.entries(n).end());
    std::sort(sorted.begin(), sorted.end());
    io::write_u64(out, sorted.size());
    for (const auto& [gram, value] : sorted) {
      io::write_u32(out, static_cast<std::uint32_t>(gram.size()));
      out.write(gram.data(), static_cast<std::streamsize>(gram.size()));
      io::write_u64(out, value);
    }
  }
  return std::move(out).str();
}

void save_df(const DfTable& table, const std::filesystem::path& path) {
  io::write_file(path, df_to_bytes(table));
}

DfTable load_df(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string source = path.string();
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kDfMagic, 4) != 0) {
    throw LoadError(source + ": bad magic, expected NNDF");
  }
  const auto version = io::read_u32(in, "version");
  if (version != kDfVersion) {
    throw LoadError(source + ": unsupported version " + std::to_string(version));
  }
  const auto doc_count = io::read_u64(in, "doc_count");
  std::array<DfTable::Map, kMaxOrder> df;
  for (int n = 1; n <= kMaxOrder; ++n) {
    const auto entries = io::read_u64(in, "entry count");
    for (std::uint64_t e = 0; e < entries; ++e) {
      const auto length = io::read_u32(in, "n-gram length");
      std::string gram(length, '\0');
      if (!in.read(gram.data(), length)) {
        throw LoadError(source + ": unexpected end of file while reading n-gram");
      }
      if (std::count(gram.begin(), gram.end(), kTokenSeparator) != n - 1) {
        throw LoadError(source + ": malformed " + std::to_string(n) + "-gram entry");
      }
      const auto value = io::read_u64(in, "df");
      if (!df[n - 1].emplace(std::move(gram), value).second) {
        throw LoadError(source + ": duplicate n-gram entry");
      }
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw LoadError(source + ": trailing bytes after df table");
  }
  try {
    return DfTable(doc_count, std::move(df));
  } catch (const LoadError& e) {
    throw LoadError(source + ": " + e.what());
  }
}

SimilarityKind SimilarityKind::parse(std::string_view name) {
  if (name == "bleu") return bleu();
  if (name == "cider") return cider_d();
  throw UsageError("unknown similarity '" + std::string(name) + "', expected one of {bleu, cider}");
}

std::string SimilarityKind::name() const {
  return type == SimilarityType::kBleu ? "bleu" : "cider";
}

void SimilarityKind::validate() const {
  if (!(sigma > 0.0) || !(scale > 0.0)) {
    throw UsageError("CIDEr-D sigma and scale must be positive");
  }
}

double sim_bleu(const NGramProfile& c, const NGramProfile& ref) {
  require_nonempty(c, "sim_bleu");
  require_nonempty(ref, "sim_bleu");
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= kMaxOrder; ++n) {
    const std::size_t total = c.total(n);
    if (total == 0) continue;
    std::uint64_t matches = 0;
    const auto cand = c.order(n);
    const auto refs = ref.order(n);
    for_each_shared(cand, refs, [&](std::size_t i, std::size_t j) {
      matches += std::min(cand[i].count, refs[j].count);
    });
    const double precision = matches > 0
                                 ? static_cast<double>(matches) / static_cast<double>(total)
                                 : 1.0 / (2.0 * static_cast<double>(total));
    log_sum += std::log(precision);
    ++orders;
  }
  const double c_len = static_cast<double>(c.token_length());
  const double r_len = static_cast<double>(ref.token_length());
  const double bp = c_len >= r_len ? 1.0 : std::exp(1.0 - r_len / c_len);
  return bp * std::exp(log_sum / orders);
}

TfIdfVector::TfIdfVector(NGramProfile profile, const DfTable& df) : profile_(std::move(profile)) {
  for (int n = 1; n <= kMaxOrder; ++n) {
    const auto entries = profile_.order(n);
    auto& weights = idf_[n - 1];
    weights.reserve(entries.size());
    double sq = 0.0;
    for (const auto& e : entries) {
      const double w = df.idf(n, e.gram);
      weights.push_back(w);
      const double g = e.count * w;
      sq += g * g;
    }
    norms_[n - 1] = std::sqrt(sq);
  }
}

double sim_ciderd(const TfIdfVector& c, const TfIdfVector& ref, const SimilarityKind& kind) {
  if (kind.type != SimilarityType::kCiderD) {
    throw UsageError("sim_ciderd requires a CIDEr-D similarity kind");
  }
  kind.validate();
  require_nonempty(c.profile(), "sim_ciderd");
  require_nonempty(ref.profile(), "sim_ciderd");

  double order_sum = 0.0;
  for (int n = 1; n <= kMaxOrder; ++n) {
    const double denom = c.norm(n) * ref.norm(n);
    if (denom == 0.0) continue;
    const auto cand = c.profile().order(n);
    const auto refs = ref.profile().order(n);
    const auto ref_idf = ref.idf(n);
    double numer = 0.0;
    for_each_shared(cand, refs, [&](std::size_t i, std::size_t j) {
      const double w = ref_idf[j];
      const double clipped = std::min(cand[i].count, refs[j].count) * w;
      numer += clipped * (refs[j].count * w);
    });
    order_sum += numer / denom;
  }
  const double delta = static_cast<double>(c.profile().token_length()) -
                       static_cast<double>(ref.profile().token_length());
  const double penalty = std::exp(-(delta * delta) / (2.0 * kind.sigma * kind.sigma));
  return kind.scale * penalty * order_sum / kMaxOrder;
}

double sim_ciderd(const NGramProfile& c, const NGramProfile& ref, const DfTable& df,
                  const SimilarityKind& kind) {
  return sim_ciderd(TfIdfVector(c, df), TfIdfVector(ref, df), kind);
}

}  // namespace nncap
