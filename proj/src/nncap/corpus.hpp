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

#ifndef NNCAP_CORPUS_HPP_
#define NNCAP_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace nncap {

using ImageId = std::int64_t;
using CaptionId = std::int64_t;
using Tokens = std::vector<std::string>;

// Lowercases ASCII letters, replaces every byte that is not a letter, digit
// or apostrophe with a space, and splits on whitespace. Bytes >= 0x80 count
// as letters so UTF-8 words pass through intact.
Tokens tokenize(std::string_view raw_text);

std::string join_tokens(const Tokens& tokens);

struct Caption {
  CaptionId caption_id = 0;
  ImageId image_id = 0;
  std::string raw_text;
  Tokens tokens;  // == tokenize(raw_text), never empty inside a corpus

  bool operator==(const Caption&) const = default;
};

// Images with their ordered caption lists. Immutable once built.
class CaptionCorpus {
 public:
  CaptionCorpus() = default;

  // Validates that caption ids are unique and every caption belongs to a
  // listed image; throws LoadError otherwise. Captions keep their relative
  // order within each image.
  CaptionCorpus(std::vector<ImageId> images, std::vector<Caption> captions,
                std::size_t dropped_captions = 0,
                std::size_t captions_per_image = 5);

  const std::vector<ImageId>& images() const { return images_; }
  std::size_t image_count() const { return images_.size(); }
  std::size_t caption_count() const { return caption_count_; }
  std::size_t captions_per_image() const { return captions_per_image_; }
  // Captions discarded at load because they tokenized to nothing.
  std::size_t dropped_captions() const { return dropped_captions_; }

  bool contains(ImageId id) const { return index_.contains(id); }
  // Throws UsageError for an unknown image.
  std::span<const Caption> captions_of(ImageId id) const;

  // All captions, image by image in corpus order.
  std::vector<const Caption*> all_captions() const;

  // Restricts to the given images (which must be present), preserving the
  // order of `keep`.
  CaptionCorpus subset(std::span<const ImageId> keep) const;

  bool operator==(const CaptionCorpus& other) const {
    return images_ == other.images_ && captions_ == other.captions_;
  }

 private:
  std::vector<ImageId> images_;
  std::vector<std::vector<Caption>> captions_;
  std::unordered_map<ImageId, std::size_t> index_;
  std::size_t caption_count_ = 0;
  std::size_t dropped_captions_ = 0;
  std::size_t captions_per_image_ = 5;
};

// Reads a COCO-style caption annotation file, or JSON lines when the path
// ends in ".jsonl". Throws IoError / LoadError.
CaptionCorpus load_captions(const std::filesystem::path& path);

// Serializes in COCO caption shape with deterministic ordering.
std::string captions_to_json(const CaptionCorpus& corpus);
void save_captions(const CaptionCorpus& corpus, const std::filesystem::path& path);

struct SplitSpec {
  std::uint64_t seed = 0;
  double tune_fraction = 0.5;
  double testval_fraction = 0.5;
};

struct CorpusSplit {
  CaptionCorpus tune;
  CaptionCorpus testval;
};

// Image-level partition. Images are ordered by a seeded hash of their id and
// the first round(tune_fraction * N) go to the tuning half.
CorpusSplit split_validation(const CaptionCorpus& corpus, const SplitSpec& spec);

}  // namespace nncap

#endif  // NNCAP_CORPUS_HPP_
