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

#include "csmix/generator.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "csmix/format.h"
#include "csmix/parallel.h"

namespace csmix {
namespace {

constexpr uint64_t kGenerateStream = 0x637377;  // "csw"

const Span& MatrixSpan(const MinimalUnit& u, UnitSide side) {
  return side == UnitSide::kSource ? u.src : u.tgt;
}

}  // namespace

ReplacementMode ParseReplacementMode(const std::string& name) {
  if (name == "mlm_fraction") return ReplacementMode::kMlmFraction;
  if (name == "exponential") return ReplacementMode::kExponential;
  throw std::invalid_argument("unknown replacement mode '" + name + "'");
}

std::string ReplacementModeName(ReplacementMode mode) {
  return mode == ReplacementMode::kMlmFraction ? "mlm_fraction"
                                               : "exponential";
}

void ReplacementPolicy::Validate() const {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("fraction must lie in (0, 1)");
  }
  if (short_threshold < 1) {
    throw std::invalid_argument("short_threshold must be at least 1");
  }
  if (max_replacements < 1) {
    throw std::invalid_argument("max_replacements must be at least 1");
  }
}

std::string ChooseMatrix(const SentencePair& pair, Rng& rng) {
  return rng.Bernoulli(0.5) ? pair.source.lang : pair.target.lang;
}

int DrawExponentialCount(int max_replacements, Rng& rng) {
  const double u = rng.Unit();
  double tail = 0.0;
  for (int k = 1; k <= max_replacements; ++k) tail += std::ldexp(1.0, -(k + 1));
  double acc = 1.0 - tail;
  if (u < acc) return 0;
  for (int k = 1; k < max_replacements; ++k) {
    acc += std::ldexp(1.0, -(k + 1));
    if (u < acc) return k;
  }
  return max_replacements;
}

size_t ReplacementBudget(double fraction, size_t matrix_len) {
  // The epsilon keeps exact halves such as 0.15 * 30 from rounding down.
  const double raw = fraction * static_cast<double>(matrix_len);
  const size_t budget = static_cast<size_t>(std::floor(raw + 0.5 + 1e-9));
  return std::max<size_t>(1, budget);
}

std::vector<size_t> SampleReplacements(const std::vector<MinimalUnit>& units,
                                       UnitSide matrix_side, size_t matrix_len,
                                       const ReplacementPolicy& policy,
                                       Rng& rng) {
  std::vector<size_t> order(units.size());
  std::iota(order.begin(), order.end(), 0);

  size_t take = 0;
  if (policy.mode == ReplacementMode::kExponential) {
    const int r = DrawExponentialCount(policy.max_replacements, rng);
    if (units.empty()) return {};
    rng.Shuffle(order);
    take = std::min<size_t>(static_cast<size_t>(r), units.size());
  } else {
    if (units.empty()) return {};
    rng.Shuffle(order);
    if (matrix_len < policy.short_threshold) {
      take = 1;
    } else {
      const size_t budget = ReplacementBudget(policy.fraction, matrix_len);
      size_t covered = 0;
      while (take < order.size() && covered < budget) {
        covered += MatrixSpan(units[order[take]], matrix_side).length();
        ++take;
      }
    }
  }
  std::vector<size_t> selected(order.begin(), order.begin() + take);
  std::sort(selected.begin(), selected.end());
  return selected;
}

CswRecord ApplyReplacements(const SentencePair& pair,
                            const std::vector<MinimalUnit>& units,
                            const std::vector<size_t>& selected,
                            const std::string& matrix_lang) {
  UnitSide side;
  if (matrix_lang == pair.source.lang) {
    side = UnitSide::kSource;
  } else if (matrix_lang == pair.target.lang) {
    side = UnitSide::kTarget;
  } else {
    throw std::invalid_argument("matrix language '" + matrix_lang +
                                "' is not a side of the pair");
  }
  const Sentence& matrix = side == UnitSide::kSource ? pair.source : pair.target;
  const Sentence& embedded =
      side == UnitSide::kSource ? pair.target : pair.source;
  const UnitSide other =
      side == UnitSide::kSource ? UnitSide::kTarget : UnitSide::kSource;

  CswRecord rec;
  rec.src_mono = pair.source;
  rec.tgt_mono = pair.target;
  rec.matrix_lang = matrix_lang;
  rec.matrix_len = matrix.size();
  rec.unit_count = units.size();
  rec.unit_ids = selected;
  std::sort(rec.unit_ids.begin(), rec.unit_ids.end());

  // start position -> unit, rejecting overlaps on the matrix side
  std::vector<long> starts(matrix.size(), -1);
  std::vector<char> covered(matrix.size(), 0);
  for (size_t id : rec.unit_ids) {
    if (id >= units.size()) {
      throw std::invalid_argument("unit index " + std::to_string(id) +
                                  " out of range");
    }
    const Span& m = MatrixSpan(units[id], side);
    const Span& e = MatrixSpan(units[id], other);
    if (m.end > matrix.size() || e.end > embedded.size() || m.length() == 0) {
      throw std::invalid_argument("unit span outside the sentence");
    }
    for (size_t p = m.begin; p < m.end; ++p) {
      if (covered[p]) {
        throw std::invalid_argument("overlapping replacement selection");
      }
      covered[p] = 1;
    }
    starts[m.begin] = static_cast<long>(id);
    rec.replaced_token_count += m.length();
    rec.replaced_spans.push_back(m.length());
  }

  rec.csw.lang = kMixedLang;
  for (size_t p = 0; p < matrix.size();) {
    if (starts[p] >= 0) {
      const MinimalUnit& u = units[static_cast<size_t>(starts[p])];
      const Span& e = MatrixSpan(u, other);
      for (size_t q = e.begin; q < e.end; ++q) {
        rec.csw.tokens.push_back(embedded.tokens[q]);
      }
      p = MatrixSpan(u, side).end;
    } else {
      rec.csw.tokens.push_back(matrix.tokens[p]);
      ++p;
    }
  }
  rec.replaced_fraction =
      rec.matrix_len == 0 ? 0.0
                          : static_cast<double>(rec.replaced_token_count) /
                                static_cast<double>(rec.matrix_len);
  return rec;
}

std::vector<CswRow> EmitRows(const CswRecord& rec) {
  std::vector<CswRow> rows;
  for (const Sentence* mono : {&rec.src_mono, &rec.tgt_mono}) {
    CswRow row;
    row.pair.source = rec.csw;
    row.pair.target = *mono;
    row.pair.tag = MakeTag(mono->lang);
    row.matrix_lang = rec.matrix_lang;
    row.replaced_fraction = rec.replaced_fraction;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string FormatCswRow(const CswRow& row) {
  return FormatRow(row.pair) + '\t' + row.matrix_lang + '\t' +
         FormatDouble(row.replaced_fraction);
}

CswRow ParseCswRow(const std::string& line) {
  const auto fields = SplitTabs(line);
  if (fields.size() != 4) {
    throw std::invalid_argument("expected 4 tab-separated fields, got " +
                                std::to_string(fields.size()));
  }
  CswRow row;
  row.pair = ParseRow(fields[0] + '\t' + fields[1], kMixedLang);
  if (row.pair.tag) {
    row.pair.target.lang = row.pair.tag->substr(2, row.pair.tag->size() - 3);
  }
  row.matrix_lang = fields[2];
  row.replaced_fraction = ParseDouble(fields[3]);
  return row;
}

PostfilterResult Postfilter(const std::vector<CswRow>& rows, double ratio_max,
                            size_t max_len) {
  CleaningPolicy policy;
  policy.min_len = 1;
  policy.max_len = max_len;
  policy.ratio_max = ratio_max;
  policy.apply_ratio = true;
  PostfilterResult result;
  result.report.stage = "postfilter";
  for (const auto& row : rows) {
    if (auto reason = RejectionReason(row.pair, policy)) {
      ++result.report.rejected_by_reason[*reason];
    } else {
      result.rows.push_back(row);
    }
  }
  result.report.kept = result.rows.size();
  return result;
}

size_t FractionBin(size_t replaced, size_t matrix_len) {
  if (matrix_len == 0) return 0;
  return std::min<size_t>(19, replaced * 20 / matrix_len);
}

std::string RecordToJson(const CswRecord& rec) {
  nlohmann::ordered_json j;
  j["matrix_lang"] = rec.matrix_lang;
  j["matrix_len"] = rec.matrix_len;
  j["replaced_token_count"] = rec.replaced_token_count;
  j["replaced_fraction"] = rec.replaced_fraction;
  j["unit_count"] = rec.unit_count;
  j["unit_ids"] = rec.unit_ids;
  j["replaced_spans"] = rec.replaced_spans;
  j["csw"] = JoinTokens(rec.csw.tokens);
  j["src_lang"] = rec.src_mono.lang;
  j["src"] = JoinTokens(rec.src_mono.tokens);
  j["tgt_lang"] = rec.tgt_mono.lang;
  j["tgt"] = JoinTokens(rec.tgt_mono.tokens);
  return j.dump();
}

CswRecord RecordFromJson(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  CswRecord rec;
  rec.matrix_lang = j.at("matrix_lang").get<std::string>();
  rec.matrix_len = j.at("matrix_len").get<size_t>();
  rec.replaced_token_count = j.at("replaced_token_count").get<size_t>();
  rec.replaced_fraction = j.at("replaced_fraction").get<double>();
  rec.unit_count = j.at("unit_count").get<size_t>();
  rec.unit_ids = j.at("unit_ids").get<std::vector<size_t>>();
  rec.replaced_spans = j.at("replaced_spans").get<std::vector<size_t>>();
  rec.csw = {SplitWhitespace(j.at("csw").get<std::string>()), kMixedLang};
  rec.src_mono = {SplitWhitespace(j.at("src").get<std::string>()),
                  j.at("src_lang").get<std::string>()};
  rec.tgt_mono = {SplitWhitespace(j.at("tgt").get<std::string>()),
                  j.at("tgt_lang").get<std::string>()};
  return rec;
}

std::string GenerationReport::ToJson(const ReplacementPolicy& policy) const {
  nlohmann::ordered_json j;
  j["lines"] = lines;
  j["zero_unit_records"] = zero_unit_records;
  j["matrix_counts"] = nlohmann::ordered_json::object();
  for (const auto& [lang, n] : matrix_counts) j["matrix_counts"][lang] = n;
  auto bins = nlohmann::ordered_json::array();
  for (const auto& [bin, n] : fraction_histogram) {
    bins.push_back({{"bin_start", FormatFixed(bin * 0.05, 2)},
                    {"bin_end", FormatFixed((bin + 1) * 0.05, 2)},
                    {"count", n}});
  }
  j["fraction_histogram"] = bins;
  auto spans = nlohmann::ordered_json::array();
  for (const auto& [len, n] : span_histogram) {
    spans.push_back({{"span", len}, {"count", n}});
  }
  j["span_histogram"] = spans;
  j["rows_emitted"] = rows_emitted;
  j["postfilter"] = nlohmann::ordered_json::parse(postfilter.ToJsonLine());
  j["policy"] = {{"mode", ReplacementModeName(policy.mode)},
                 {"fraction", policy.fraction},
                 {"short_threshold", policy.short_threshold},
                 {"max_replacements", policy.max_replacements},
                 {"seed", policy.seed}};
  return j.dump(2);
}

GenerationResult GenerateCsw(const std::vector<SentencePair>& pairs,
                             const std::vector<AlignmentLinkSet>& links,
                             const ReplacementPolicy& policy,
                             const GenerationOverrides& overrides,
                             int workers) {
  policy.Validate();
  if (pairs.size() != links.size()) {
    throw std::invalid_argument("corpus has " + std::to_string(pairs.size()) +
                                " pairs but " + std::to_string(links.size()) +
                                " alignment lines");
  }
  GenerationResult result;
  result.records.resize(pairs.size());
  ParallelFor(pairs.size(), workers, [&](size_t i) {
    const SentencePair& pair = pairs[i];
    const AlignmentLinkSet& l = links[i];
    if (l.src_len != pair.source.size() || l.tgt_len != pair.target.size()) {
      throw std::invalid_argument("alignment line " + std::to_string(i + 1) +
                                  " does not match the sentence lengths");
    }
    Rng rng(DeriveSeed(policy.seed, kGenerateStream, i));
    std::string matrix = ChooseMatrix(pair, rng);
    if (overrides.matrix_lang) matrix = *overrides.matrix_lang;
    const auto units = ExtractUnits(l);
    const UnitSide side = matrix == pair.source.lang ? UnitSide::kSource
                                                     : UnitSide::kTarget;
    const size_t matrix_len =
        side == UnitSide::kSource ? pair.source.size() : pair.target.size();
    std::vector<size_t> selected =
        overrides.unit_ids
            ? *overrides.unit_ids
            : SampleReplacements(units, side, matrix_len, policy, rng);
    result.records[i] = ApplyReplacements(pair, units, selected, matrix);
  });

  GenerationReport& report = result.report;
  report.lines = pairs.size();
  std::vector<CswRow> rows;
  for (const auto& rec : result.records) {
    if (rec.unit_count == 0) ++report.zero_unit_records;
    ++report.matrix_counts[rec.matrix_lang];
    ++report.fraction_histogram[FractionBin(rec.replaced_token_count,
                                            rec.matrix_len)];
    for (size_t len : rec.replaced_spans) ++report.span_histogram[len];
    for (auto& row : EmitRows(rec)) rows.push_back(std::move(row));
  }
  report.rows_emitted = rows.size();
  auto filtered = Postfilter(rows);
  result.rows = std::move(filtered.rows);
  report.postfilter = std::move(filtered.report);
  return result;
}

}  // namespace csmix
