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

#ifndef NNCAP_INDEX_HPP_
#define NNCAP_INDEX_HPP_

#include <filesystem>
#include <string>

#include "nncap/corpus.hpp"
#include "nncap/features.hpp"
#include "nncap/textsim.hpp"

namespace nncap {

// Training-side artifacts needed to caption queries.
struct Index {
  FeatureStore features;
  CaptionCorpus corpus;
  DfTable df;
};

inline constexpr const char* kIndexFeaturesFile = "features.nnfv";
inline constexpr const char* kIndexCaptionsFile = "captions.json";
inline constexpr const char* kIndexDfFile = "df.nndf";
inline constexpr const char* kIndexManifestFile = "manifest.json";

// Loads and validates the training features and captions, then writes the
// feature store, normalized captions, df table and a manifest with counts and
// SHA-256 content hashes into out_dir. Every feature row must have captions.
// On failure no partial outputs are left behind. Returns the manifest JSON.
std::string build_index(const std::filesystem::path& features_path,
                        const std::filesystem::path& captions_path,
                        const std::filesystem::path& out_dir);

Index open_index(const std::filesystem::path& dir);

}  // namespace nncap

#endif  // NNCAP_INDEX_HPP_
