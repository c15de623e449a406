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

#ifndef CSMIX_CORPUS_IO_H_
#define CSMIX_CORPUS_IO_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csmix/rng.h"
#include "csmix/types.h"

namespace csmix {

// Tokenization.
//
// The rule set is fixed and deterministic:
//  - input is NFC-normalized and split on Unicode whitespace;
//  - punctuation at either edge of a whitespace chunk is detached one code
//    point at a time (apostrophes are never detached);
//  - chunks made only of punctuation become one token per code point;
//  - for elision languages ("fr" and "mixed") a leading elided article
//    such as l' d' qu' is split off after the apostrophe.
// Detokenize inverts these rules, so Tokenize(Detokenize(s)) == s for every
// s that Tokenize produced.

bool UsesElision(std::string_view lang);
Sentence Tokenize(std::string_view raw, const std::string& lang);
std::string Detokenize(const Sentence& s);

struct CleaningPolicy {
  size_t min_len = 2;
  size_t max_len = 250;
  double ratio_max = 1.5;
  // The ratio bound is only enforced where asked for (post-generation).
  bool apply_ratio = false;
  // Report empty sides under their own reason instead of "too_short".
  bool drop_empty = true;

  // Throws std::invalid_argument when the bounds are inconsistent.
  void Validate() const;
};

// JSON-lines summary: {stage, kept, rejected_by_reason}.
struct StageReport {
  std::string stage;
  size_t kept = 0;
  std::map<std::string, size_t> rejected_by_reason;

  size_t rejected() const;
  std::string ToJsonLine() const;
};

// Length ratio longer/shorter, tag excluded. Infinite when a side is empty.
double LengthRatio(const SentencePair& pair);

// Returns the reason a pair fails the policy, or nullopt when it is kept.
std::optional<std::string> RejectionReason(const SentencePair& pair,
                                           const CleaningPolicy& policy);

struct CleanResult {
  std::vector<SentencePair> pairs;
  StageReport report;
};

// Keeps pairs whose sides satisfy the policy, in input order.
CleanResult CleanCorpus(const std::vector<SentencePair>& pairs,
                        const CleaningPolicy& policy, int workers = 1);

// Target-language tags.
std::string MakeTag(std::string_view lang);
bool IsReservedTag(std::string_view token);

// Sets the tag to "<2" + target_lang + ">", replacing any existing tag.
SentencePair PrependTag(SentencePair pair, const std::string& target_lang,
                        const LanguagePair& langs);

// Source tokens with the tag materialized as the first token.
std::vector<std::string> TaggedSourceTokens(const SentencePair& pair);

// Length used for replacement budgets: source tokens without the tag.
inline size_t BudgetLength(const SentencePair& pair) {
  return pair.source.size();
}

// The two monolingual rows of a parallel pair: source tagged with the target
// language, then the reversed pair tagged with the source language.
std::vector<SentencePair> BidirectionalRows(const SentencePair& pair,
                                            const LanguagePair& langs);

// Concatenates a and b and applies a seeded uniform shuffle.
template <typename T>
std::vector<T> MixCorpora(std::vector<T> a, std::vector<T> b, uint64_t seed) {
  a.reserve(a.size() + b.size());
  for (auto& item : b) a.push_back(std::move(item));
  Rng rng(DeriveSeed(seed, 0x6d6978, 0));
  rng.Shuffle(a);
  return a;
}

// File formats. Plain text is one sentence per line with parallel files
// paired by line number; TSV rows are source \t target [\t extra...].

std::vector<std::string> ReadLines(const std::string& path);
void WriteLines(const std::string& path, const std::vector<std::string>& lines);

// Reads two pre-tokenized files (whitespace-separated tokens).
std::vector<SentencePair> ReadParallel(const std::string& src_path,
                                       const std::string& tgt_path,
                                       const std::string& src_lang,
                                       const std::string& tgt_lang);

std::vector<std::string> SplitTabs(const std::string& line);

// "<2xx> tokens...\ttarget tokens..."
std::string FormatRow(const SentencePair& pair);

// Parses a row written by FormatRow. A leading reserved tag becomes the tag.
// Language labels are not stored in the row and are left empty unless given.
SentencePair ParseRow(const std::string& line, const std::string& src_lang = "",
                      const std::string& tgt_lang = "");

}  // namespace csmix

#endif  // CSMIX_CORPUS_IO_H_
