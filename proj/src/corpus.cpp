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

#include "nncap/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "nncap/error.hpp"
#include "nncap/io_util.hpp"

namespace nncap {
namespace {

using nlohmann::json;

constexpr std::int64_t kOrdinalsPerImage = 1000;

bool is_token_byte(unsigned char ch) {
  return ch >= 0x80 || (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
         (ch >= '0' && ch <= '9') || ch == '\'';
}

std::int64_t required_int(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) {
    throw LoadError(where + ": missing or non-integer '" + key + "'");
  }
  return it->get<std::int64_t>();
}

std::string required_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw LoadError(where + ": missing or non-string '" + key + "'");
  }
  return it->get<std::string>();
}

// Collects raw records, assigns synthesized ids and drops empty captions.
class CorpusBuilder {
 public:
  void add_image(ImageId id) {
    if (seen_images_.insert(id).second) images_.push_back(id);
  }

  void add_caption(ImageId image_id, std::string text, std::optional<CaptionId> id,
                   const std::string& where) {
    std::int64_t ordinal = ordinals_[image_id]++;
    CaptionId caption_id;
    if (id) {
      caption_id = *id;
    } else {
      if (ordinal >= kOrdinalsPerImage) {
        throw LoadError(where + ": more than 1000 captions without explicit ids for image " +
                        std::to_string(image_id));
      }
      constexpr auto kMax = std::numeric_limits<std::int64_t>::max() / kOrdinalsPerImage;
      if (image_id < 0 || image_id >= kMax) {
        throw LoadError(where + ": cannot synthesize a caption id for image " +
                        std::to_string(image_id));
      }
      caption_id = image_id * kOrdinalsPerImage + ordinal;
    }
    Tokens tokens = tokenize(text);
    if (tokens.empty()) {
      ++dropped_;
      return;
    }
    if (!caption_ids_.insert(caption_id).second) {
      throw LoadError(where + ": duplicate caption id " + std::to_string(caption_id));
    }
    captions_.push_back(Caption{caption_id, image_id, std::move(text), std::move(tokens)});
  }

  CaptionCorpus build() && {
    return CaptionCorpus(std::move(images_), std::move(captions_), dropped_);
  }

 private:
  std::vector<ImageId> images_;
  std::unordered_set<ImageId> seen_images_;
  std::vector<Caption> captions_;
  std::unordered_set<CaptionId> caption_ids_;
  std::unordered_map<ImageId, std::int64_t> ordinals_;
  std::size_t dropped_ = 0;
};

CaptionCorpus parse_coco(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(source + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw LoadError(source + ": top level is not an object");
  auto images = doc.find("images");
  auto annotations = doc.find("annotations");
  if (images == doc.end() || !images->is_array()) {
    throw LoadError(source + ": missing 'images' array");
  }
  if (annotations == doc.end() || !annotations->is_array()) {
    throw LoadError(source + ": missing 'annotations' array");
  }

  CorpusBuilder builder;
  std::unordered_set<ImageId> declared;
  for (std::size_t i = 0; i < images->size(); ++i) {
    const json& record = (*images)[i];
    std::string where = source + ": images[" + std::to_string(i) + "]";
    if (!record.is_object()) throw LoadError(where + ": not an object");
    ImageId id = required_int(record, "id", where);
    if (!declared.insert(id).second) {
      throw LoadError(where + ": duplicate image id " + std::to_string(id));
    }
    builder.add_image(id);
  }
  for (std::size_t i = 0; i < annotations->size(); ++i) {
    const json& record = (*annotations)[i];
    std::string where = source + ": annotations[" + std::to_string(i) + "]";
    if (!record.is_object()) throw LoadError(where + ": not an object");
    ImageId image_id = required_int(record, "image_id", where);
    if (!declared.contains(image_id)) {
      throw LoadError(where + ": unknown image_id " + std::to_string(image_id));
    }
    std::optional<CaptionId> id;
    if (record.contains("id")) id = required_int(record, "id", where);
    builder.add_caption(image_id, required_string(record, "caption", where), id, where);
  }
  return std::move(builder).build();
}

CaptionCorpus parse_jsonl(const std::string& text, const std::string& source) {
  CorpusBuilder builder;
  std::istringstream in(text);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string where = source + ": line " + std::to_string(lineno);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LoadError(where + ": invalid JSON: " + e.what());
    }
    if (!record.is_object()) throw LoadError(where + ": not an object");
    ImageId image_id = required_int(record, "image_id", where);
    std::optional<CaptionId> id;
    if (record.contains("id")) id = required_int(record, "id", where);
    builder.add_image(image_id);
    builder.add_caption(image_id, required_string(record, "caption", where), id, where);
  }
  return std::move(builder).build();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Tokens tokenize(std::string_view raw_text) {
  Tokens tokens;
  std::string current;
  for (char c : raw_text) {
    auto ch = static_cast<unsigned char>(c);
    if (is_token_byte(ch)) {
      current.push_back((ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

CaptionCorpus::CaptionCorpus(std::vector<ImageId> images, std::vector<Caption> captions,
                             std::size_t dropped_captions, std::size_t captions_per_image)
    : images_(std::move(images)),
      captions_(images_.size()),
      dropped_captions_(dropped_captions),
      captions_per_image_(captions_per_image) {
  index_.reserve(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) {
    if (!index_.emplace(images_[i], i).second) {
      throw LoadError("duplicate image id " + std::to_string(images_[i]));
    }
  }
  std::unordered_set<CaptionId> ids;
  ids.reserve(captions.size());
  for (auto& caption : captions) {
    auto it = index_.find(caption.image_id);
    if (it == index_.end()) {
      throw LoadError("caption " + std::to_string(caption.caption_id) +
                      " refers to unknown image " + std::to_string(caption.image_id));
    }
    if (!ids.insert(caption.caption_id).second) {
      throw LoadError("duplicate caption id " + std::to_string(caption.caption_id));
    }
    if (caption.tokens.empty()) {
      throw LoadError("caption " + std::to_string(caption.caption_id) + " has no tokens");
    }
    captions_[it->second].push_back(std::move(caption));
    ++caption_count_;
  }
}

std::span<const Caption> CaptionCorpus::captions_of(ImageId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw UsageError("image " + std::to_string(id) + " is not in the caption corpus");
  }
  return captions_[it->second];
}

std::vector<const Caption*> CaptionCorpus::all_captions() const {
  std::vector<const Caption*> out;
  out.reserve(caption_count_);
  for (const auto& list : captions_) {
    for (const auto& caption : list) out.push_back(&caption);
  }
  return out;
}

CaptionCorpus CaptionCorpus::subset(std::span<const ImageId> keep) const {
  std::vector<ImageId> images(keep.begin(), keep.end());
  std::vector<Caption> captions;
  for (ImageId id : keep) {
    auto list = captions_of(id);
    captions.insert(captions.end(), list.begin(), list.end());
  }
  return CaptionCorpus(std::move(images), std::move(captions), 0, captions_per_image_);
}

CaptionCorpus load_captions(const std::filesystem::path& path) {
  std::string text = io::read_file(path);
  if (io::has_extension(path, ".jsonl")) return parse_jsonl(text, path.string());
  return parse_coco(text, path.string());
}

std::string captions_to_json(const CaptionCorpus& corpus) {
  json images = json::array();
  json annotations = json::array();
  for (ImageId id : corpus.images()) {
    images.push_back({{"id", id}});
    for (const Caption& caption : corpus.captions_of(id)) {
      annotations.push_back(
          {{"id", caption.caption_id}, {"image_id", id}, {"caption", caption.raw_text}});
    }
  }
  json doc;
  doc["images"] = std::move(images);
  doc["annotations"] = std::move(annotations);
  return doc.dump() + "\n";
}

void save_captions(const CaptionCorpus& corpus, const std::filesystem::path& path) {
  io::write_file(path, captions_to_json(corpus));
}

CorpusSplit split_validation(const CaptionCorpus& corpus, const SplitSpec& spec) {
  if (!(spec.tune_fraction > 0.0) || !(spec.testval_fraction > 0.0) ||
      std::abs(spec.tune_fraction + spec.testval_fraction - 1.0) > 1e-9) {
    throw UsageError("split fractions must be positive and sum to 1");
  }
  if (corpus.image_count() == 0) throw UsageError("cannot split an empty corpus");

  const std::uint64_t salt = splitmix64(spec.seed);
  std::vector<std::pair<std::uint64_t, ImageId>> keyed;
  keyed.reserve(corpus.image_count());
  for (ImageId id : corpus.images()) {
    keyed.emplace_back(splitmix64(static_cast<std::uint64_t>(id) ^ salt), id);
  }
  std::sort(keyed.begin(), keyed.end());

  const auto n = keyed.size();
  const auto tune_count = static_cast<std::size_t>(
      std::llround(spec.tune_fraction * static_cast<double>(n)));

  // Keep each half in the original corpus order.
  std::unordered_set<ImageId> tune_ids;
  for (std::size_t i = 0; i < tune_count; ++i) tune_ids.insert(keyed[i].second);
  std::vector<ImageId> tune, testval;
  for (ImageId id : corpus.images()) {
    (tune_ids.contains(id) ? tune : testval).push_back(id);
  }
  return CorpusSplit{corpus.subset(tune), corpus.subset(testval)};
}

}  // namespace nncap
