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

#ifndef CSMIX_GENERATOR_H_
#define CSMIX_GENERATOR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csmix/aligner.h"
#include "csmix/corpus_io.h"
#include "csmix/rng.h"
#include "csmix/types.h"
#include "csmix/units.h"

namespace csmix {

enum class ReplacementMode { kMlmFraction, kExponential };

ReplacementMode ParseReplacementMode(const std::string& name);
std::string ReplacementModeName(ReplacementMode mode);

struct ReplacementPolicy {
  ReplacementMode mode = ReplacementMode::kMlmFraction;
  double fraction = 0.15;
  // Matrix sentences shorter than this get exactly one replacement.
  size_t short_threshold = 7;
  // Largest replacement count drawn in exponential mode.
  int max_replacements = 10;
  uint64_t seed = 0;

  void Validate() const;
};

struct CswRecord {
  Sentence csw;  // lang is kMixedLang
  Sentence src_mono;
  Sentence tgt_mono;
  std::string matrix_lang;
  size_t matrix_len = 0;
  size_t replaced_token_count = 0;
  double replaced_fraction = 0.0;
  // Indices into the pair's unit list, ascending.
  std::vector<size_t> unit_ids;
  // Matrix-side length of each replaced unit, in unit_ids order.
  std::vector<size_t> replaced_spans;
  size_t unit_count = 0;

  bool operator==(const CswRecord&) const = default;
};

// Bernoulli(0.5) between the source and the target language.
std::string ChooseMatrix(const SentencePair& pair, Rng& rng);

// Replacement count r in exponential mode: P(r = k) = 2^-(k+1) for
// k in 1..rep, and the remaining mass 1/2 + 2^-(rep+1) on k = 0.
int DrawExponentialCount(int max_replacements, Rng& rng);

// Selects units to replace; returns ascending unit indices. `matrix_side`
// names which span of each unit lies in the matrix sentence.
std::vector<size_t> SampleReplacements(const std::vector<MinimalUnit>& units,
                                       UnitSide matrix_side, size_t matrix_len,
                                       const ReplacementPolicy& policy,
                                       Rng& rng);

// Matrix-side token budget for mlm_fraction mode: round-half-up of
// fraction * matrix_len, at least 1.
size_t ReplacementBudget(double fraction, size_t matrix_len);

// Substitutes each selected matrix-side span with the unit's embedded-side
// span. Throws std::invalid_argument for an invalid or overlapping selection
// and for a matrix language that is neither side of the pair.
CswRecord ApplyReplacements(const SentencePair& pair,
                            const std::vector<MinimalUnit>& units,
                            const std::vector<size_t>& selected,
                            const std::string& matrix_lang);

// A generated row: tagged code-switched source, monolingual target, plus
// the record's matrix language and replaced fraction.
struct CswRow {
  SentencePair pair;
  std::string matrix_lang;
  double replaced_fraction = 0.0;

  bool operator==(const CswRow&) const = default;
};

// One row per language: the code-switched sentence tagged with the source
// language into src_mono, then tagged with the target language into tgt_mono.
std::vector<CswRow> EmitRows(const CswRecord& rec);

// "<2xx> csw \t target \t matrix_lang \t replaced_fraction"
std::string FormatCswRow(const CswRow& row);
CswRow ParseCswRow(const std::string& line);

struct PostfilterResult {
  std::vector<CswRow> rows;
  StageReport report;
};

// Drops rows whose length ratio exceeds ratio_max or whose sides exceed
// max_len (tag excluded). Order is preserved.
PostfilterResult Postfilter(const std::vector<CswRow>& rows,
                            double ratio_max = 1.5, size_t max_len = 250);

// Fraction bin of width 0.05 computed in integers so boundaries are exact.
// A fully replaced sentence falls in the last bin, 19.
size_t FractionBin(size_t replaced, size_t matrix_len);

// One JSON object per line with every record field; used by `stats`.
std::string RecordToJson(const CswRecord& rec);
CswRecord RecordFromJson(const std::string& line);

struct GenerationOverrides {
  std::optional<std::string> matrix_lang;
  std::optional<std::vector<size_t>> unit_ids;
};

struct GenerationReport {
  size_t lines = 0;
  size_t zero_unit_records = 0;
  std::map<std::string, size_t> matrix_counts;
  // Bin index (width 0.05) -> count.
  std::map<size_t, size_t> fraction_histogram;
  // Matrix-side span length of replaced units -> count.
  std::map<size_t, size_t> span_histogram;
  size_t rows_emitted = 0;
  StageReport postfilter;

  std::string ToJson(const ReplacementPolicy& policy) const;
};

struct GenerationResult {
  std::vector<CswRecord> records;
  std::vector<CswRow> rows;  // after the postfilter
  GenerationReport report;
};

// Generates one record per pair. Line i draws from its own stream derived
// from (policy.seed, i), so output does not depend on the worker count.
// `links[i]` aligns pairs[i] source to target.
GenerationResult GenerateCsw(const std::vector<SentencePair>& pairs,
                             const std::vector<AlignmentLinkSet>& links,
                             const ReplacementPolicy& policy,
                             const GenerationOverrides& overrides = {},
                             int workers = 1);

}  // namespace csmix

#endif  // CSMIX_GENERATOR_H_
