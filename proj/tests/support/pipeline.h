// Copyright 2026 The csmix Authors.
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

// Drives the command-line tool in-process over a small synthetic corpus.
#ifndef CSMIX_TESTS_SUPPORT_PIPELINE_H_
#define CSMIX_TESTS_SUPPORT_PIPELINE_H_

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "csmix/cli.h"
#include "support/synthetic.h"

namespace csmix::pipeline {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult Cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = RunCli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// One invocation per stage, in dependency order. Paths are absolute.
inline std::vector<std::vector<std::string>> Stages(const std::string& dir) {
  auto f = [&](const std::string& name) { return dir + "/" + name; };
  return {
      {"clean", "--src", f("raw.en"), "--tgt", f("raw.fr"), "--out-src",
       f("clean.en"), "--out-tgt", f("clean.fr"), "--report", f("clean.json")},
      {"tag", "--src", f("clean.en"), "--tgt", f("clean.fr"), "--out",
       f("tagged.tsv")},
      {"mix", "--input", f("clean.en"), "--input", f("clean.fr"), "--out",
       f("mixed.txt"), "--seed", "7"},
      {"bpe-learn", "--input", f("clean.en"), "--input", f("clean.fr"), "--out",
       f("bpe.model"), "--merges", "60"},
      {"bpe-apply", "--input", f("tagged.tsv"), "--model", f("bpe.model"),
       "--out", f("tagged.bpe.tsv"), "--text-fields", "2"},
      {"align-train", "--src", f("clean.en"), "--tgt", f("clean.fr"), "--out",
       f("fwd.model"), "--reverse-out", f("rev.model"), "--trace",
       f("trace.csv")},
      {"align-decode", "--src", f("clean.en"), "--tgt", f("clean.fr"),
       "--model", f("fwd.model"), "--out", f("fwd.align")},
      {"align-decode", "--src", f("clean.en"), "--tgt", f("clean.fr"),
       "--model", f("rev.model"), "--reverse", "--out", f("rev.align")},
      {"symmetrize", "--src", f("clean.en"), "--tgt", f("clean.fr"), "--fwd",
       f("fwd.align"), "--rev", f("rev.align"), "--out", f("sym.align")},
      {"units", "--src", f("clean.en"), "--tgt", f("clean.fr"), "--align",
       f("sym.align"), "--out", f("units.txt"), "--histogram-out",
       f("units.csv")},
      {"generate", "--src", f("clean.en"), "--tgt", f("clean.fr"), "--align",
       f("sym.align"), "--out", f("csw.tsv"), "--records", f("csw.jsonl"),
       "--report", f("generate.json"), "--seed", "11"},
      {"stats", "--corpus", f("clean.en"), "--records", f("csw.jsonl"),
       "--out-dir", f("stats"), "--svg"},
      {"bleu", "--copying", f("csw.tsv"), "--out", f("bleu.json")},
      {"obj-train", "--train", f("csw.tsv"), "--out", f("obj.csv"),
       "--checkpoint", f("encoder.txt"), "--steps", "30", "--batch-size", "8",
       "--seed", "5"},
      {"gradcheck", "--kind", "ams", "--batches", "3", "--seed", "2", "--out",
       f("gradcheck.json")},
  };
}

// Writes the raw corpus the first stage reads.
inline void WriteInputs(const std::string& dir, size_t pairs, uint64_t seed) {
  const auto c = synthetic::PhraseCorpus(pairs, 4, 16, 0.15, 60, seed);
  synthetic::WriteCorpus(c, dir + "/raw.en", dir + "/raw.fr", "");
}

// Every file under `dir`, keyed by relative path.
inline std::map<std::string, std::string> Snapshot(const std::string& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    files[std::filesystem::relative(e.path(), dir).string()] =
        synthetic::Slurp(e.path().string());
  }
  return files;
}

}  // namespace csmix::pipeline

#endif  // CSMIX_TESTS_SUPPORT_PIPELINE_H_
