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

#include "nncap/index.hpp"

#include <vector>

#include <json.hpp>

#include "nncap/error.hpp"
#include "nncap/io_util.hpp"

namespace nncap {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string build_index(const fs::path& features_path, const fs::path& captions_path,
                        const fs::path& out_dir) {
  const FeatureStore features = load_features(features_path);
  const CaptionCorpus corpus = load_captions(captions_path);

  std::size_t missing = 0;
  ImageId first_missing = 0;
  for (ImageId id : features.ids()) {
    if (!corpus.contains(id) || corpus.captions_of(id).empty()) {
      if (missing++ == 0) first_missing = id;
    }
  }
  if (missing > 0) {
    throw LoadError(std::to_string(missing) + " feature rows have no captions (first: image " +
                    std::to_string(first_missing) + ")");
  }
  std::size_t captioned_without_features = 0;
  for (ImageId id : corpus.images()) {
    if (!features.index_of(id)) ++captioned_without_features;
  }

  const DfTable df = build_df(corpus);
  const std::vector<std::pair<const char*, std::string>> files = {
      {kIndexFeaturesFile, features_to_bytes(features)},
      {kIndexCaptionsFile, captions_to_json(corpus)},
      {kIndexDfFile, df_to_bytes(df)},
  };

  ordered_json manifest;
  manifest["format"] = "nncap-index";
  manifest["version"] = 1;
  manifest["train_images"] = corpus.image_count();
  manifest["train_captions"] = corpus.caption_count();
  manifest["dropped_captions"] = corpus.dropped_captions();
  manifest["feature_count"] = features.size();
  manifest["dim"] = features.dim();
  manifest["df_doc_count"] = df.doc_count();
  manifest["validation"] = {{"features_without_captions", 0},
                            {"captioned_images_without_features", captioned_without_features}};
  ordered_json hashes;
  for (const auto& [name, bytes] : files) {
    hashes[name] = {{"sha256", io::sha256_hex(bytes)}, {"bytes", bytes.size()}};
  }
  manifest["files"] = std::move(hashes);
  const std::string manifest_text = manifest.dump(2) + "\n";

  std::error_code ec;
  const bool created = !fs::exists(out_dir, ec) && fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create index directory " + out_dir.string());

  std::vector<fs::path> written;
  try {
    for (const auto& [name, bytes] : files) {
      written.push_back(out_dir / name);
      io::write_file(written.back(), bytes);
    }
    written.push_back(out_dir / kIndexManifestFile);
    io::write_file(written.back(), manifest_text);
  } catch (...) {
    for (const auto& path : written) fs::remove(path, ec);
    if (created) fs::remove(out_dir, ec);
    throw;
  }
  return manifest_text;
}

Index open_index(const fs::path& dir) {
  const fs::path manifest_path = dir / kIndexManifestFile;
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(io::read_file(manifest_path));
  } catch (const ordered_json::exception& e) {
    throw LoadError(manifest_path.string() + ": invalid manifest: " + e.what());
  }
  if (manifest.value("format", "") != "nncap-index" || manifest.value("version", 0) != 1) {
    throw LoadError(manifest_path.string() + ": not an nncap index manifest");
  }

  Index index{load_features(dir / kIndexFeaturesFile), load_captions(dir / kIndexCaptionsFile),
              load_df(dir / kIndexDfFile)};
  if (manifest.value("feature_count", std::size_t{0}) != index.features.size() ||
      manifest.value("train_captions", std::size_t{0}) != index.corpus.caption_count() ||
      manifest.value("df_doc_count", std::uint64_t{0}) != index.df.doc_count()) {
    throw LoadError(dir.string() + ": index files do not match the manifest counts");
  }
  return index;
}

}  // namespace nncap
