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

#include "fixtures.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace nncap::testing {
namespace {

constexpr std::size_t kDim = 16;
constexpr int kClusters = 3;
constexpr std::size_t kImagesPerCluster = 60;
constexpr std::size_t kQueries = 100;
constexpr std::size_t kCaptionsPerImage = 5;

struct Template {
  const char* key;
  std::vector<std::string> adj, mid, tail;
  std::string (*render)(const std::string&, const std::string&, const std::string&);
};

const std::vector<Template>& templates() {
  static const std::vector<Template> kTemplates = {
      {"dog",
       {"brown", "black", "small", "white"},
       {"runs", "plays", "sits"},
       {"grass", "beach", "lawn"},
       [](const std::string& a, const std::string& b, const std::string& c) {
         return "A " + a + " dog " + b + " on the " + c + ".";
       }},
      {"kitchen",
       {"clean", "small", "modern", "white"},
       {"stove", "sink", "fridge"},
       {"table", "window", "counter"},
       [](const std::string& a, const std::string& b, const std::string& c) {
         return "A " + a + " kitchen with a " + b + " and a " + c + ".";
       }},
      {"airplane",
       {"large", "white", "small", "jet"},
       {"flies", "soars", "glides"},
       {"city", "clouds", "ocean"},
       [](const std::string& a, const std::string& b, const std::string& c) {
         return "A " + a + " airplane " + b + " over the " + c + ".";
       }},
  };
  return kTemplates;
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

std::string template_caption(std::mt19937_64& rng, int cluster) {
  const Template& t = templates()[cluster];
  return t.render(pick(rng, t.adj), pick(rng, t.mid), pick(rng, t.tail));
}

std::vector<float> noisy_axis(std::mt19937_64& rng, std::size_t dim, std::size_t axis,
                              double noise) {
  std::normal_distribution<double> gauss(0.0, noise);
  std::vector<float> v(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    v[d] = static_cast<float>((d == axis ? 1.0 : 0.0) + gauss(rng));
  }
  return v;
}

Caption make_caption(CaptionId id, ImageId image, std::string text) {
  Tokens tokens = tokenize(text);
  return Caption{id, image, std::move(text), std::move(tokens)};
}

}  // namespace

int caption_cluster(const Tokens& tokens) {
  for (int c = 0; c < kClusters; ++c) {
    for (const auto& tok : tokens) {
      if (tok == templates()[c].key) return c;
    }
  }
  return -1;
}

ClusterFixture make_cluster_fixture(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution outlier(0.05);
  ClusterFixture fx;

  std::vector<ImageId> ids;
  std::vector<float> matrix;
  std::vector<Caption> captions;
  for (int c = 0; c < kClusters; ++c) {
    for (std::size_t i = 0; i < kImagesPerCluster; ++i) {
      const ImageId id = 1 + static_cast<ImageId>(c * kImagesPerCluster + i);
      ids.push_back(id);
      const auto v = noisy_axis(rng, kDim, static_cast<std::size_t>(c), 0.1);
      matrix.insert(matrix.end(), v.begin(), v.end());
      for (std::size_t o = 0; o < kCaptionsPerImage; ++o) {
        int source = c;
        if (outlier(rng)) {
          source = (c + 1 + static_cast<int>(rng() % 2)) % kClusters;
          ++fx.outlier_captions;
        }
        captions.push_back(
            make_caption(id * 10 + static_cast<CaptionId>(o), id, template_caption(rng, source)));
      }
    }
  }
  fx.train = FeatureStore(kDim, ids, std::move(matrix));
  fx.train_corpus = CaptionCorpus(ids, std::move(captions));
  fx.df = build_df(fx.train_corpus);

  std::vector<ImageId> qids;
  std::vector<float> qmatrix;
  std::vector<Caption> qcaptions;
  for (std::size_t q = 0; q < kQueries; ++q) {
    const int c = static_cast<int>(q % kClusters);
    const ImageId id = 10001 + static_cast<ImageId>(q);
    qids.push_back(id);
    fx.query_cluster.push_back(c);
    // Spread of query noise gives a spread of neighbor distances.
    const double noise = 0.05 + 0.1 * static_cast<double>(q % 7) / 6.0;
    const auto v = noisy_axis(rng, kDim, static_cast<std::size_t>(c), noise);
    qmatrix.insert(qmatrix.end(), v.begin(), v.end());
    for (std::size_t o = 0; o < kCaptionsPerImage; ++o) {
      qcaptions.push_back(
          make_caption(id * 10 + static_cast<CaptionId>(o), id, template_caption(rng, c)));
    }
  }
  fx.queries = FeatureStore(kDim, qids, std::move(qmatrix));
  fx.query_refs = CaptionCorpus(qids, std::move(qcaptions));

  fx.far_query_id = 20000;
  fx.far_query = noisy_axis(rng, kDim, kDim - 1, 0.05);
  std::vector<Caption> far_caps;
  const char* boats[] = {"A wooden boat floating on the calm lake.",
                         "A small boat on a quiet lake at dawn.",
                         "Two boats moored near the wooden pier.",
                         "A rowing boat drifting across still water.",
                         "An old fishing boat tied to a dock."};
  for (std::size_t o = 0; o < kCaptionsPerImage; ++o) {
    far_caps.push_back(make_caption(fx.far_query_id * 10 + static_cast<CaptionId>(o),
                                    fx.far_query_id, boats[o]));
  }
  fx.far_query_refs = CaptionCorpus({fx.far_query_id}, std::move(far_caps));
  return fx;
}

std::vector<std::string> adversarial_majority() {
  const std::vector<std::string> adj = {"brown", "small", "black", "white",
                                        "big",   "happy", "young", "fluffy"};
  const std::vector<std::string> ground = {"grass", "lawn", "field", "meadow", "yard", "park"};
  std::vector<std::string> combos;
  for (const auto& a : adj) {
    for (const auto& g : ground) combos.push_back("a " + a + " dog runs in the " + g);
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < 26; ++i) out.push_back(combos[(i * 7) % combos.size()]);
  return out;
}

std::vector<std::string> adversarial_outliers() {
  return {"a man is runs in the street",
          "people runs in the street at night",
          "a red bus runs in the street",
          "two women runs in the street corner",
          "a yellow taxi runs in the street",
          "cars runs in the street in traffic",
          "a crowd runs in the street outside",
          "a police officer runs in the street",
          "a bicycle runs in the street by a wall",
          "a child runs in the street with a kite",
          "the horse is runs in the street",
          "an old truck runs in the street",
          "a cat runs in the street near a car",
          "a sign runs in the street",
          "a lamp post runs in the street",
          "a boy runs in the street holding a ball",
          "tourists runs in the street",
          "a girl runs in the street in the rain",
          "a van runs in the street",
          "soldiers runs in the street",
          "a cow runs in the street in india",
          "a motorcycle runs in the street",
          "a vendor runs in the street selling fruit"};
}

std::string adversarial_bridge() { return "a dog runs in the street"; }

AdversarialFixture make_adversarial_fixture(std::size_t regions) {
  constexpr std::size_t kImagesPerRegion = 10;
  const std::size_t dim = regions + 2;
  std::mt19937_64 rng(7);

  std::vector<std::string> pool = adversarial_majority();
  for (auto& s : adversarial_outliers()) pool.push_back(s);
  pool.push_back(adversarial_bridge());

  AdversarialFixture fx;
  std::vector<ImageId> ids, qids;
  std::vector<float> matrix, qmatrix;
  std::vector<Caption> captions, qcaptions;
  const auto majority = adversarial_majority();
  for (std::size_t r = 0; r < regions; ++r) {
    for (std::size_t i = 0; i < kImagesPerRegion; ++i) {
      const ImageId id = static_cast<ImageId>(100 * (r + 1) + i);
      ids.push_back(id);
      const auto v = noisy_axis(rng, dim, r, 0.02);
      matrix.insert(matrix.end(), v.begin(), v.end());
      for (std::size_t o = 0; o < kCaptionsPerImage; ++o) {
        captions.push_back(make_caption(id * 10 + static_cast<CaptionId>(o), id,
                                        pool[i * kCaptionsPerImage + o]));
      }
    }
    const ImageId qid = static_cast<ImageId>(9000 + r);
    qids.push_back(qid);
    const auto v = noisy_axis(rng, dim, r, 0.02);
    qmatrix.insert(qmatrix.end(), v.begin(), v.end());
    for (std::size_t o = 0; o < kCaptionsPerImage; ++o) {
      qcaptions.push_back(make_caption(qid * 10 + static_cast<CaptionId>(o), qid,
                                       majority[(r * 5 + o * 3) % majority.size()]));
    }
  }
  fx.train = FeatureStore(dim, ids, std::move(matrix));
  fx.train_corpus = CaptionCorpus(ids, std::move(captions));
  fx.df = build_df(fx.train_corpus);
  fx.queries = FeatureStore(dim, qids, std::move(qmatrix));
  fx.query_refs = CaptionCorpus(qids, std::move(qcaptions));
  return fx;
}

QuerySet queries_of(const FeatureStore& features, const CaptionCorpus& refs, std::size_t nrefs) {
  return make_queries(features, refs, nrefs);
}

Tokens random_caption(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
  static const std::vector<std::string> kVocab = {"a",   "dog", "cat",  "runs", "on",  "the",
                                                  "red", "car", "grass", "big", "sits", "near"};
  const std::size_t len = std::uniform_int_distribution<std::size_t>(min_len, max_len)(rng);
  Tokens out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(pick(rng, kVocab));
  return out;
}

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "nncap-test-XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace nncap::testing
