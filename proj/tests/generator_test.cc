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

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "csmix/generator.h"
#include "support/synthetic.h"

namespace csmix {
namespace {

Sentence S(const std::string& text, const std::string& lang) {
  return {SplitWhitespace(text), lang};
}

SentencePair WeatherPair() {
  return {S("The weather today is nice .", "en"),
          S("Il fait beau aujourd'hui .", "fr"), std::nullopt};
}

AlignmentLinkSet WeatherLinks() {
  return AlignmentLinkSet::FromPharaoh("0-0 1-1 2-3 4-2 5-4", 6, 5);
}

std::vector<MinimalUnit> SingleTokenUnits(size_t n) {
  std::vector<MinimalUnit> units;
  for (size_t i = 0; i < n; ++i) units.push_back({{i, i + 1}, {i, i + 1}, 1});
  return units;
}

TEST(PolicyTest, Validation) {
  ReplacementPolicy p;
  EXPECT_NO_THROW(p.Validate());
  for (double f : {0.0, 1.0, -0.1}) {
    p = {};
    p.fraction = f;
    EXPECT_THROW(p.Validate(), std::invalid_argument);
  }
  p = {};
  p.short_threshold = 0;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  p = {};
  p.max_replacements = 0;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  EXPECT_EQ(ParseReplacementMode("exponential"), ReplacementMode::kExponential);
  EXPECT_THROW(ParseReplacementMode("uniform"), std::invalid_argument);
}

TEST(ChooseMatrixTest, BalancedAndDeterministic) {
  const SentencePair pair = WeatherPair();
  size_t en = 0;
  std::vector<std::string> first, second;
  for (int i = 0; i < 10000; ++i) {
    Rng a(DeriveSeed(3, 1, static_cast<uint64_t>(i)));
    Rng b(DeriveSeed(3, 1, static_cast<uint64_t>(i)));
    first.push_back(ChooseMatrix(pair, a));
    second.push_back(ChooseMatrix(pair, b));
    ASSERT_TRUE(first.back() == "en" || first.back() == "fr");
    en += first.back() == "en";
  }
  EXPECT_EQ(first, second);
  const double rate = static_cast<double>(en) / 10000.0;
  EXPECT_GE(rate, 0.48);
  EXPECT_LE(rate, 0.52);
}

TEST(BudgetTest, RoundHalfUpWithFloor) {
  EXPECT_EQ(ReplacementBudget(0.15, 100), 15u);
  EXPECT_EQ(ReplacementBudget(0.15, 10), 2u);   // 1.5 rounds up
  EXPECT_EQ(ReplacementBudget(0.15, 9), 1u);    // 1.35
  EXPECT_EQ(ReplacementBudget(0.15, 3), 1u);    // floor of 1
  EXPECT_EQ(ReplacementBudget(0.15, 30), 5u);   // 4.5 rounds up
  EXPECT_EQ(ReplacementBudget(0.15, 70), 11u);  // 10.5 rounds up
}

TEST(SampleTest, FifteenOfHundred) {
  const auto units = SingleTokenUnits(100);
  Rng rng(1);
  const auto sel =
      SampleReplacements(units, UnitSide::kSource, 100, ReplacementPolicy{}, rng);
  EXPECT_EQ(sel.size(), 15u);
  EXPECT_TRUE(std::is_sorted(sel.begin(), sel.end()));
  EXPECT_EQ(std::set<size_t>(sel.begin(), sel.end()).size(), 15u);
}

TEST(SampleTest, ShortSentenceGetsOne) {
  const auto units = SingleTokenUnits(5);
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    EXPECT_EQ(SampleReplacements(units, UnitSide::kTarget, 5,
                                 ReplacementPolicy{}, rng)
                  .size(),
              1u);
  }
}

TEST(SampleTest, NoUnitsNoSelection) {
  Rng rng(1);
  EXPECT_TRUE(
      SampleReplacements({}, UnitSide::kSource, 30, ReplacementPolicy{}, rng)
          .empty());
}

TEST(SampleTest, StopsAtFirstDrawReachingBudget) {
  // Units of length 2 and budget 3: two draws reach 4 >= 3.
  std::vector<MinimalUnit> units;
  for (size_t i = 0; i < 10; ++i) {
    units.push_back({{2 * i, 2 * i + 2}, {i, i + 1}, 2});
  }
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    EXPECT_EQ(SampleReplacements(units, UnitSide::kSource, 20,
                                 ReplacementPolicy{}, rng)
                  .size(),
              2u);
  }
}

TEST(SampleTest, ExponentialCounts) {
  std::map<int, size_t> counts;
  Rng rng(77);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[DrawExponentialCount(10, rng)];
  EXPECT_NEAR(counts[0] / static_cast<double>(n), 0.5, 0.01);
  EXPECT_NEAR(counts[1] / static_cast<double>(n), 0.25, 0.01);
  EXPECT_EQ(counts.rbegin()->first <= 10, true);

  ReplacementPolicy p;
  p.mode = ReplacementMode::kExponential;
  p.max_replacements = 3;
  const auto units = SingleTokenUnits(2);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_LE(SampleReplacements(units, UnitSide::kSource, 40, p, rng).size(), 2u);
  }
}

TEST(ApplyTest, SingleUnitSpanningTwoTargetTokens) {
  const SentencePair pair = {S("Difficult Year for Pharmacists .", "en"),
                             S("Année difficile pour les pharmaciens .", "fr"),
                             std::nullopt};
  const std::vector<MinimalUnit> units = {{{2, 3}, {2, 4}, 2}};
  const CswRecord rec = ApplyReplacements(pair, units, {0}, "en");
  EXPECT_EQ(JoinTokens(rec.csw.tokens), "Difficult Year pour les Pharmacists .");
  EXPECT_EQ(rec.csw.lang, kMixedLang);
  EXPECT_EQ(rec.matrix_lang, "en");
  EXPECT_EQ(rec.replaced_token_count, 1u);
  EXPECT_DOUBLE_EQ(rec.replaced_fraction, 0.2);
}

TEST(ApplyTest, NothingSelectedCopiesMatrix) {
  const SentencePair pair = WeatherPair();
  const auto units = ExtractUnits(WeatherLinks());
  const CswRecord rec = ApplyReplacements(pair, units, {}, "fr");
  EXPECT_EQ(rec.csw.tokens, pair.target.tokens);
  EXPECT_EQ(rec.replaced_fraction, 0.0);
  const auto rows = EmitRows(rec);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].pair.source.tokens, pair.target.tokens);
  EXPECT_EQ(rows[1].pair.target.tokens, pair.target.tokens);
}

TEST(ApplyTest, AllUnitsOnDiagonalGivesEmbedded) {
  const SentencePair pair = {S("a b c d", "en"), S("w x y z", "fr"),
                             std::nullopt};
  const auto units = SingleTokenUnits(4);
  const CswRecord rec = ApplyReplacements(pair, units, {0, 1, 2, 3}, "en");
  EXPECT_EQ(rec.csw.tokens, pair.target.tokens);
  EXPECT_DOUBLE_EQ(rec.replaced_fraction, 1.0);
}

TEST(ApplyTest, RejectsBadSelections) {
  const SentencePair pair = {S("a b c", "en"), S("x y z", "fr"), std::nullopt};
  const std::vector<MinimalUnit> overlapping = {{{0, 2}, {0, 2}, 2},
                                                {{1, 3}, {1, 3}, 2}};
  EXPECT_THROW(ApplyReplacements(pair, overlapping, {0, 1}, "en"),
               std::invalid_argument);
  EXPECT_THROW(ApplyReplacements(pair, SingleTokenUnits(3), {5}, "en"),
               std::invalid_argument);
  EXPECT_THROW(ApplyReplacements(pair, SingleTokenUnits(3), {0}, "de"),
               std::invalid_argument);
}

TEST(EmitTest, WeatherRows) {
  const SentencePair pair = WeatherPair();
  const auto units = ExtractUnits(WeatherLinks());
  const CswRecord rec = ApplyReplacements(pair, units, {2, 3}, "fr");
  EXPECT_DOUBLE_EQ(rec.replaced_fraction, 0.4);
  const auto rows = EmitRows(rec);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(FormatRow(rows[0].pair),
            "<2en> Il fait nice today .\tThe weather today is nice .");
  EXPECT_EQ(FormatRow(rows[1].pair),
            "<2fr> Il fait nice today .\tIl fait beau aujourd'hui .");
  for (const auto& row : rows) {
    EXPECT_EQ(ParseCswRow(FormatCswRow(row)), row);
  }
}

TEST(PostfilterTest, Bounds) {
  auto row = [](size_t s, size_t t) {
    CswRow r;
    r.pair.source = {std::vector<std::string>(s, "a"), kMixedLang};
    r.pair.target = {std::vector<std::string>(t, "b"), "fr"};
    r.pair.tag = "<2fr>";
    r.matrix_lang = "en";
    return r;
  };
  const auto result = Postfilter({row(30, 10), row(10, 10), row(251, 250),
                                  row(15, 10), row(16, 10)});
  ASSERT_EQ(result.rows.size(), 2u);
  EXPECT_EQ(result.rows[0], row(10, 10));
  EXPECT_EQ(result.rows[1], row(15, 10));
  EXPECT_EQ(result.report.stage, "postfilter");
  EXPECT_EQ(result.report.rejected(), 3u);
}

TEST(FractionBinTest, ExactBoundaries) {
  EXPECT_EQ(FractionBin(3, 20), 3u);    // 0.15 starts bin 3
  EXPECT_EQ(FractionBin(2, 20), 2u);
  EXPECT_EQ(FractionBin(0, 7), 0u);
  EXPECT_EQ(FractionBin(7, 7), 19u);
  EXPECT_EQ(FractionBin(15, 100), 3u);
  EXPECT_EQ(FractionBin(19, 100), 3u);
  EXPECT_EQ(FractionBin(20, 100), 4u);
}

TEST(RecordJsonTest, RoundTrip) {
  const auto units = ExtractUnits(WeatherLinks());
  CswRecord rec = ApplyReplacements(WeatherPair(), units, {2, 3}, "fr");
  EXPECT_EQ(RecordFromJson(RecordToJson(rec)), rec);
}

TEST(GenerateTest, ForcedWeatherRows) {
  GenerationOverrides o;
  o.matrix_lang = "fr";
  o.unit_ids = std::vector<size_t>{2, 3};
  const auto result =
      GenerateCsw({WeatherPair()}, {WeatherLinks()}, ReplacementPolicy{}, o);
  ASSERT_EQ(result.rows.size(), 2u);
  EXPECT_EQ(FormatCswRow(result.rows[0]),
            "<2en> Il fait nice today .\tThe weather today is nice .\tfr\t0.4");
}

TEST(GenerateTest, InvariantsOverCorpus) {
  const auto c = synthetic::PhraseCorpus(2000, 3, 30, 0.15, 300, 12);
  ReplacementPolicy policy;
  policy.seed = 5;
  const auto result = GenerateCsw(c.pairs, c.gold, policy);
  ASSERT_EQ(result.records.size(), c.pairs.size());
  for (size_t i = 0; i < c.pairs.size(); ++i) {
    const auto& rec = result.records[i];
    const auto& pair = c.pairs[i];
    const Sentence& matrix = rec.matrix_lang == "en" ? pair.source : pair.target;
    const Sentence& embedded = rec.matrix_lang == "en" ? pair.target : pair.source;
    EXPECT_EQ(rec.matrix_len, matrix.size());
    EXPECT_DOUBLE_EQ(rec.replaced_fraction,
                     static_cast<double>(rec.replaced_token_count) /
                         static_cast<double>(rec.matrix_len));
    if (rec.matrix_len < policy.short_threshold && rec.unit_count > 0) {
      EXPECT_EQ(rec.unit_ids.size(), 1u);
    }
    // Language purity: every token comes from one of the two sentences.
    std::multiset<std::string> pool(matrix.tokens.begin(), matrix.tokens.end());
    pool.insert(embedded.tokens.begin(), embedded.tokens.end());
    for (const auto& tok : rec.csw.tokens) EXPECT_TRUE(pool.count(tok)) << tok;
    // Disjoint replaced spans, one unit each.
    const auto units = ExtractUnits(c.gold[i]);
    std::set<size_t> covered;
    for (size_t id : rec.unit_ids) {
      const Span span = rec.matrix_lang == "en" ? units[id].src : units[id].tgt;
      for (size_t p = span.begin; p < span.end; ++p) {
        EXPECT_TRUE(covered.insert(p).second);
      }
    }
    EXPECT_EQ(covered.size(), rec.replaced_token_count);
  }
}

TEST(GenerateTest, WorkerCountIndependent) {
  const auto c = synthetic::PhraseCorpus(600, 3, 30, 0.2, 100, 4);
  ReplacementPolicy policy;
  policy.seed = 9;
  const auto a = GenerateCsw(c.pairs, c.gold, policy, {}, 1);
  const auto b = GenerateCsw(c.pairs, c.gold, policy, {}, 4);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(a.report.ToJson(policy), b.report.ToJson(policy));
}

TEST(GenerateTest, ZeroUnitLinesAreKept) {
  const SentencePair pair = {S("a b c", "en"), S("x y z", "fr"), std::nullopt};
  const auto result = GenerateCsw({pair}, {AlignmentLinkSet({}, 3, 3)},
                                  ReplacementPolicy{});
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_EQ(result.records[0].replaced_token_count, 0u);
  EXPECT_EQ(result.report.zero_unit_records, 1u);
}

TEST(GenerateTest, MismatchedInputsThrow) {
  EXPECT_THROW(GenerateCsw({WeatherPair()}, {}, ReplacementPolicy{}),
               std::invalid_argument);
  EXPECT_THROW(GenerateCsw({WeatherPair()}, {AlignmentLinkSet({}, 2, 2)},
                           ReplacementPolicy{}),
               std::invalid_argument);
}

}  // namespace
}  // namespace csmix
