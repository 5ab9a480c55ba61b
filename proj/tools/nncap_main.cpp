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

// nncap command-line tool. Exit codes: 0 success, 1 internal failure,
// 2 usage or input error.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nncap/nncap.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

int exit_code_for(int status) {
  if (status == NNCAP_OK) return kExitOk;
  return status == NNCAP_ERROR_INTERNAL ? kExitInternal : kExitUsage;
}

class CliError {
 public:
  CliError(int status, std::string message) : status_(status), message_(std::move(message)) {}
  int status() const { return status_; }
  const std::string& message() const { return message_; }

 private:
  int status_;
  std::string message_;
};

void check(int status) {
  if (status != NNCAP_OK) throw CliError(status, nncap_last_error());
}

struct Deleter {
  void operator()(nncap_index* p) const { nncap_index_free(p); }
  void operator()(nncap_features* p) const { nncap_features_free(p); }
  void operator()(nncap_corpus* p) const { nncap_corpus_free(p); }
  void operator()(char* p) const { nncap_free(p); }
  void operator()(uint64_t* p) const { nncap_free(p); }
};
template <typename T>
using Owned = std::unique_ptr<T, Deleter>;

Owned<nncap_index> open_index(const std::string& dir) {
  nncap_index* raw = nullptr;
  check(nncap_index_open(dir.c_str(), &raw));
  return Owned<nncap_index>(raw);
}

Owned<nncap_features> load_features(const std::string& path) {
  nncap_features* raw = nullptr;
  check(nncap_features_load(path.c_str(), &raw));
  return Owned<nncap_features>(raw);
}

Owned<nncap_corpus> load_corpus(const std::string& path) {
  nncap_corpus* raw = nullptr;
  uint64_t dropped = 0;
  check(nncap_corpus_load(path.c_str(), &raw, &dropped));
  if (dropped > 0) {
    std::cerr << "warning: dropped " << dropped << " captions without tokens from " << path
              << "\n";
  }
  return Owned<nncap_corpus>(raw);
}

std::vector<uint64_t> parse_grid(const std::string& spec) {
  uint64_t* raw = nullptr;
  size_t count = 0;
  check(nncap_parse_grid(spec.c_str(), &raw, &count));
  Owned<uint64_t> owned(raw);
  return std::vector<uint64_t>(raw, raw + count);
}

nncap_sim_kind parse_sim(const std::string& name, const char* flag) {
  if (name == "bleu") return NNCAP_SIM_BLEU;
  if (name == "cider") return NNCAP_SIM_CIDER;
  throw CliError(NNCAP_ERROR_USAGE, std::string(flag) + ": invalid value '" + name +
                                        "', expected one of {bleu, cider}");
}

void emit(const std::string& path, const char* text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw CliError(NNCAP_ERROR_IO, "cannot write " + path);
}

struct SelectionFlags {
  uint64_t k = 80;
  uint64_t m = 200;
  std::string sim = "cider";
  uint32_t threads = 0;

  void add_to(CLI::App* cmd, bool with_km) {
    if (with_km) {
      cmd->add_option("--k", k, "Nearest training images per query")
          ->capture_default_str()
          ->check(CLI::PositiveNumber);
      cmd->add_option("--m", m, "Peer subset size for the consensus score")
          ->capture_default_str()
          ->check(CLI::PositiveNumber);
    }
    cmd->add_option("--sim", sim, "Pairwise caption similarity {bleu, cider}")
        ->capture_default_str();
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")
        ->envname("NNCAP_THREADS")
        ->capture_default_str();
  }

  nncap_select_params params() const {
    nncap_select_params p;
    nncap_select_params_init(&p);
    p.k = k;
    p.m = m;
    p.sim = parse_sim(sim, "--sim");
    p.threads = threads;
    return p;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus caption selection from nearest-neighbor training images", "nncap"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nncap_version()));

  // build-index
  std::string bi_features, bi_captions, bi_out;
  auto* build = app.add_subcommand("build-index", "Validate training data and write an index");
  build->add_option("--features", bi_features, "Training feature file (.nnfv or .jsonl)")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--captions", bi_captions, "Training caption annotations (.json or .jsonl)")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--out", bi_out, "Index directory")->required();

  // split
  std::string sp_captions, sp_tune, sp_testval;
  uint64_t sp_seed = 0;
  double sp_fraction = 0.5;
  auto* split = app.add_subcommand("split", "Split validation captions into tune/testval halves");
  split->add_option("--captions", sp_captions, "Caption annotations to split")
      ->required()
      ->check(CLI::ExistingFile);
  split->add_option("--seed", sp_seed, "Split seed")->capture_default_str();
  split->add_option("--tune-fraction", sp_fraction, "Fraction of images in the tuning half")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  split->add_option("--tune-out", sp_tune, "Output path for the tuning half")->required();
  split->add_option("--testval-out", sp_testval, "Output path for the testval half")->required();

  // select
  std::string index_dir, queries_path, refs_path, out_path, csv_path;
  SelectionFlags sel;
  auto* select = app.add_subcommand("select", "Select a consensus caption for each query");
  select->add_option("--index", index_dir, "Index directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  select->add_option("--queries", queries_path, "Query feature file")
      ->required()
      ->check(CLI::ExistingFile);
  select->add_option("--out", out_path, "Output JSON lines (default stdout)");
  sel.add_to(select, true);

  // evaluate
  uint64_t nrefs = 5;
  auto* evaluate = app.add_subcommand("evaluate", "Corpus BLEU-4 and CIDEr-D of selections");
  evaluate->add_option("--index", index_dir, "Index directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  evaluate->add_option("--queries", queries_path, "Query feature file")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--refs", refs_path, "Reference captions of the query images")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--nrefs", nrefs, "References per image (0 = all)")->capture_default_str();
  evaluate->add_option("--out", out_path, "Output JSON report (default stdout)");
  sel.add_to(evaluate, true);

  // sweep
  std::string k_grid = "10:200:10", m_grid = "25:300:25", objective = "bleu";
  auto* sweep = app.add_subcommand("sweep", "Evaluate a (k, m) grid on tuning queries");
  sweep->add_option("--index", index_dir, "Index directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  sweep->add_option("--queries", queries_path, "Tuning query feature file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--refs", refs_path, "Reference captions of the tuning images")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--k", k_grid, "k grid: lo:hi:step ranges and/or comma list")
      ->capture_default_str();
  sweep->add_option("--m", m_grid, "m grid: lo:hi:step ranges and/or comma list")
      ->capture_default_str();
  sweep->add_option("--objective", objective, "Metric used to pick the best point {bleu, cider}")
      ->capture_default_str();
  sweep->add_option("--nrefs", nrefs, "References per image (0 = all)")->capture_default_str();
  sweep->add_option("--out", out_path, "Output JSON report (default stdout)");
  sweep->add_option("--csv", csv_path, "Output CSV k,m,metric");
  sel.add_to(sweep, false);

  // bins
  uint64_t bins_j = 50, nbins = 10;
  auto* bins = app.add_subcommand("bins", "BLEU-4 by visual-similarity bin");
  bins->add_option("--index", index_dir, "Index directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  bins->add_option("--queries", queries_path, "Query feature file")
      ->required()
      ->check(CLI::ExistingFile);
  bins->add_option("--refs", refs_path, "Reference captions of the query images")
      ->required()
      ->check(CLI::ExistingFile);
  bins->add_option("--j", bins_j, "Neighbors in the mean-distance statistic")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bins->add_option("--nbins", nbins, "Number of bins")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bins->add_option("--nrefs", nrefs, "References per image (0 = all)")->capture_default_str();
  bins->add_option("--out", out_path, "Output JSON report (default stdout)");
  bins->add_option("--csv", csv_path, "Output CSV bin,count,lo,hi,bleu4");
  sel.add_to(bins, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*build) {
      char* manifest = nullptr;
      check(nncap_build_index(bi_features.c_str(), bi_captions.c_str(), bi_out.c_str(),
                              &manifest));
      Owned<char> owned(manifest);
      emit("", manifest);
    } else if (*split) {
      auto corpus = load_corpus(sp_captions);
      check(nncap_corpus_split(corpus.get(), sp_seed, sp_fraction, sp_tune.c_str(),
                               sp_testval.c_str()));
    } else if (*select) {
      const auto params = sel.params();
      auto index = open_index(index_dir);
      auto queries = load_features(queries_path);
      char* jsonl = nullptr;
      check(nncap_select(index.get(), queries.get(), &params, &jsonl));
      Owned<char> owned(jsonl);
      emit(out_path, jsonl);
    } else if (*evaluate) {
      const auto params = sel.params();
      auto index = open_index(index_dir);
      auto queries = load_features(queries_path);
      auto refs = load_corpus(refs_path);
      char* report = nullptr;
      check(nncap_evaluate(index.get(), queries.get(), refs.get(), &params, nrefs, &report));
      Owned<char> owned(report);
      emit(out_path, report);
    } else if (*sweep) {
      const auto ks = parse_grid(k_grid);
      const auto ms = parse_grid(m_grid);
      nncap_sweep_params params{ks.data(), ks.size(), ms.data(), ms.size(),
                                parse_sim(sel.sim, "--sim"), parse_sim(objective, "--objective"),
                                nrefs, sel.threads};
      auto index = open_index(index_dir);
      auto queries = load_features(queries_path);
      auto refs = load_corpus(refs_path);
      char* report = nullptr;
      char* csv = nullptr;
      check(nncap_sweep(index.get(), queries.get(), refs.get(), &params, &report, &csv));
      Owned<char> owned_report(report), owned_csv(csv);
      emit(out_path, report);
      if (!csv_path.empty()) emit(csv_path, csv);
    } else if (*bins) {
      nncap_bins_params params{sel.params(), bins_j, nbins, nrefs};
      auto index = open_index(index_dir);
      auto queries = load_features(queries_path);
      auto refs = load_corpus(refs_path);
      char* report = nullptr;
      char* csv = nullptr;
      check(nncap_bins(index.get(), queries.get(), refs.get(), &params, &report, &csv));
      Owned<char> owned_report(report), owned_csv(csv);
      emit(out_path, report);
      if (!csv_path.empty()) emit(csv_path, csv);
    }
  } catch (const CliError& e) {
    std::cerr << "nncap: " << nncap_status_string(e.status()) << ": " << e.message() << "\n";
    return exit_code_for(e.status());
  } catch (const std::exception& e) {
    std::cerr << "nncap: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
