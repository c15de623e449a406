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

#include <cmath>

#include "csmix/objectives.h"
#include "support/synthetic.h"

namespace csmix {
namespace {

Sentence S(const std::string& text) { return {SplitWhitespace(text), "en"}; }

ObjectiveConfig Config(ObjectiveKind kind, double weight = 1.0) {
  ObjectiveConfig c = ObjectiveConfig::ForKind(kind);
  c.weight = weight;
  return c;
}

// Encoder over words a..f whose rows are set by hand.
ToyEncoder HandEncoder(Pooling pooling,
                       const std::map<std::string, std::vector<double>>& rows) {
  std::vector<std::string> words;
  for (const auto& [w, v] : rows) words.push_back(w);
  ToyEncoder enc(words, rows.begin()->second.size(), pooling, 1);
  for (const auto& [w, v] : rows) {
    const size_t id = static_cast<size_t>(enc.Id(w));
    std::copy(v.begin(), v.end(), enc.params().begin() + id * enc.dim());
  }
  return enc;
}

const std::vector<ObjectiveKind> kAllKinds = {
    ObjectiveKind::kPoolCosine, ObjectiveKind::kNegMargin,
    ObjectiveKind::kRanking, ObjectiveKind::kAms,
    ObjectiveKind::kSentenceAlign};

TEST(EncodeTest, Pooling) {
  const ToyEncoder enc = HandEncoder(
      Pooling::kMax, {{"a", {1.0, -2.0, 0.5}}, {"b", {0.0, 3.0, -1.0}}});
  for (Pooling p : {Pooling::kMax, Pooling::kMean}) {
    EXPECT_EQ(enc.Encode(S("a"), p), (std::vector<double>{1.0, -2.0, 0.5}));
    EXPECT_EQ(enc.Encode(S("a b a"), p), enc.Encode(S("b a a"), p));
  }
  EXPECT_EQ(enc.Encode(S("a b"), Pooling::kMean),
            (std::vector<double>{0.5, 0.5, -0.25}));
  EXPECT_EQ(enc.Encode(S("a b"), Pooling::kMax),
            (std::vector<double>{1.0, 3.0, 0.5}));
  EXPECT_THROW(enc.Encode(S("")), std::invalid_argument);
  // Unknown words read row 0.
  EXPECT_EQ(enc.Id("zzz"), 0);
  EXPECT_EQ(enc.Word(0), ToyEncoder::kUnknown);
}

TEST(PoolCosineTest, IdenticalAndOrthogonal) {
  const ToyEncoder enc = HandEncoder(
      Pooling::kMax, {{"a", {1.0, 0.0}}, {"b", {0.0, 1.0}}, {"c", {0.3, 0.7}}});
  const auto cfg = Config(ObjectiveKind::kPoolCosine);
  Batch same{{{S("a c"), S("a c"), {}}, {S("b"), S("b"), {}}}, {}};
  EXPECT_NEAR(EvaluateObjective(enc, same, cfg).loss, -1.0, 1e-15);
  Batch orth{{{S("a"), S("b"), {}}}, {}};
  EXPECT_NEAR(EvaluateObjective(enc, orth, cfg).loss, 0.0, 1e-15);
  // Default weight is 10.
  EXPECT_EQ(ObjectiveConfig::ForKind(ObjectiveKind::kPoolCosine).weight, 10.0);
  EXPECT_EQ(ObjectiveConfig::ForKind(ObjectiveKind::kSentenceAlign).weight, 1.0);
  EXPECT_EQ(ObjectiveConfig::ForKind(ObjectiveKind::kPoolCosine).pooling,
            Pooling::kMax);
  EXPECT_EQ(ObjectiveConfig::ForKind(ObjectiveKind::kNegMargin).pooling,
            Pooling::kMean);
}

TEST(PoolCosineTest, ZeroNormSkipped) {
  const ToyEncoder enc =
      HandEncoder(Pooling::kMax, {{"a", {0.0, 0.0}}, {"b", {0.0, 1.0}}});
  Batch batch{{{S("a"), S("b"), {}}, {S("b"), S("b"), {}}}, {}};
  const auto r = EvaluateObjective(enc, batch, Config(ObjectiveKind::kPoolCosine));
  EXPECT_EQ(r.skipped_items, 1u);
  EXPECT_EQ(r.items, 1u);
  EXPECT_NEAR(r.loss, -1.0, 1e-15);
}

TEST(NegMarginTest, Examples) {
  const ToyEncoder enc = HandEncoder(
      Pooling::kMean, {{"a", {1.0, 0.0}}, {"b", {0.0, 1.0}}, {"c", {0.5, 0.2}}});
  auto cfg = Config(ObjectiveKind::kNegMargin);
  cfg.delta = 0.0;
  Batch same_neg{{{S("a c"), S("c b"), S("c b")}}, {}};
  EXPECT_NEAR(EvaluateObjective(enc, same_neg, cfg).loss, 0.0, 1e-15);
  // sim(x, y) = 1, sim(x, y') = 0: 0.4 - 1 + 0 is clipped.
  cfg.delta = 0.4;
  Batch clipped{{{S("a"), S("a"), S("b")}}, {}};
  EXPECT_EQ(EvaluateObjective(enc, clipped, cfg).loss, 0.0);
  // Active hinge: sim(x,y) = 0, sim(x,y') = 1.
  Batch active{{{S("a"), S("b"), S("a")}}, {}};
  EXPECT_NEAR(EvaluateObjective(enc, active, cfg).loss, 1.4, 1e-15);
}

TEST(RankingTest, LoneCandidateAndUniformScores) {
  const ToyEncoder enc = HandEncoder(
      Pooling::kMean, {{"a", {1.0, 0.5}}, {"b", {-0.3, 1.0}}, {"c", {0.2, 0.2}}});
  for (ObjectiveKind kind : {ObjectiveKind::kRanking, ObjectiveKind::kSentenceAlign}) {
    auto cfg = Config(kind);
    Batch lone{{{S("a b"), S("c"), {}}}, {}};
    EXPECT_NEAR(EvaluateObjective(enc, lone, cfg).loss, 0.0, 1e-15);
    // All targets identical: every candidate scores the same.
    Batch uniform;
    for (const char* x : {"a", "b", "a b", "c"}) {
      uniform.items.push_back({S(x), S("c a"), {}});
    }
    EXPECT_NEAR(EvaluateObjective(enc, uniform, cfg).loss, std::log(4.0), 1e-12);
  }
  auto cfg = Config(ObjectiveKind::kRanking);
  cfg.negatives = 0;
  Batch two{{{S("a"), S("b"), {}}, {S("b"), S("a"), {}}}, {}};
  EXPECT_NEAR(EvaluateObjective(enc, two, cfg).loss, 0.0, 1e-15);
  cfg.negatives = 2;
  Batch three{{{S("a"), S("c"), {}}, {S("b"), S("c"), {}}, {S("c"), S("c"), {}}},
              {}};
  EXPECT_NEAR(EvaluateObjective(enc, three, cfg).loss, std::log(3.0), 1e-12);
}

TEST(AmsTest, ZeroMarginEqualsRankingAndMonotone) {
  Rng rng(4);
  const auto words = SyntheticWords(30);
  const ToyEncoder enc(words, 8, Pooling::kMean, 2);
  const Batch batch = RandomBatch(words, 6, 1, 5, rng);
  auto ams = Config(ObjectiveKind::kAms);
  ams.margin = 0.0;
  const auto a = EvaluateObjective(enc, batch, ams);
  const auto r = EvaluateObjective(enc, batch, Config(ObjectiveKind::kRanking));
  EXPECT_EQ(a.loss, r.loss);
  EXPECT_EQ(a.gradient, r.gradient);
  double prev = a.loss;
  for (double m : {0.1, 0.5, 1.0, 4.0, 20.0}) {
    ams.margin = m;
    const double loss = EvaluateObjective(enc, batch, ams).loss;
    EXPECT_GT(loss, prev);
    prev = loss;
  }
}

TEST(SentenceAlignTest, ExtraCandidatesJoinPool) {
  const ToyEncoder enc =
      HandEncoder(Pooling::kMean, {{"a", {0.5, 0.5}}, {"b", {0.5, 0.5}}});
  Batch batch{{{S("a"), S("b"), {}}}, {S("a"), S("b a")}};
  EXPECT_NEAR(
      EvaluateObjective(enc, batch, Config(ObjectiveKind::kSentenceAlign)).loss,
      std::log(3.0), 1e-12);
}

TEST(GradcheckTest, AllKindsOnRandomBatches) {
  const auto words = SyntheticWords(20);
  for (ObjectiveKind kind : kAllKinds) {
    const auto cfg = ObjectiveConfig::ForKind(kind);
    for (uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(seed);
      const ToyEncoder enc(words, 8, cfg.pooling, seed + 100);
      const Batch batch = RandomBatch(words, 6, 1, 6, rng);
      const auto r = Gradcheck(enc, batch, cfg, 1e-5);
      EXPECT_LT(r.max_rel_err, 1e-4) << ObjectiveKindName(kind) << " seed " << seed;
      EXPECT_GT(r.checked, 0u);
    }
  }
}

TEST(GradcheckTest, EmptyBatchIsVacuous) {
  const ToyEncoder enc(SyntheticWords(5), 4, Pooling::kMax, 1);
  const auto r = Gradcheck(enc, Batch{}, Config(ObjectiveKind::kPoolCosine));
  EXPECT_EQ(r.max_rel_err, 0.0);
  EXPECT_EQ(r.checked, 0u);
}

TEST(GradientTest, DuplicatedPairDoublesUnderSum) {
  const auto words = SyntheticWords(10);
  const ToyEncoder enc(words, 6, Pooling::kMax, 3);
  auto cfg = Config(ObjectiveKind::kPoolCosine);
  cfg.reduction = Reduction::kSum;
  const Example ex{S("w1 w2 w3"), S("w4 w5"), {}};
  const auto one = EvaluateObjective(enc, Batch{{ex}, {}}, cfg);
  const auto two = EvaluateObjective(enc, Batch{{ex, ex}, {}}, cfg);
  for (size_t p = 0; p < one.gradient.size(); ++p) {
    EXPECT_DOUBLE_EQ(two.gradient[p], 2.0 * one.gradient[p]);
  }
}

TEST(GradientTest, WeightScalesExactly) {
  const auto words = SyntheticWords(25);
  for (ObjectiveKind kind : kAllKinds) {
    Rng rng(8);
    auto cfg = ObjectiveConfig::ForKind(kind);
    const ToyEncoder enc(words, 8, cfg.pooling, 6);
    const Batch batch = RandomBatch(words, 5, 1, 6, rng);
    cfg.weight = 1.0;
    const auto base = EvaluateObjective(enc, batch, cfg);
    for (double w : {10.0, 0.25, 3.0}) {
      cfg.weight = w;
      const auto scaled = EvaluateObjective(enc, batch, cfg);
      EXPECT_EQ(scaled.loss, w * base.loss);
      for (size_t p = 0; p < base.gradient.size(); ++p) {
        ASSERT_EQ(scaled.gradient[p], w * base.gradient[p]);
      }
    }
  }
}

TEST(BoundsTest, LossRanges) {
  const auto words = SyntheticWords(30);
  for (uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const Batch batch = RandomBatch(words, 5, 1, 6, rng);
    for (ObjectiveKind kind : kAllKinds) {
      const auto cfg = Config(kind);
      const ToyEncoder enc(words, 8, cfg.pooling, seed);
      const double loss = EvaluateObjective(enc, batch, cfg).loss;
      if (kind == ObjectiveKind::kPoolCosine) {
        EXPECT_GE(loss, -1.0);
        EXPECT_LE(loss, 1.0);
      } else {
        EXPECT_GE(loss, 0.0);
      }
    }
  }
}

TEST(TrainTest, ZeroLearningRateKeepsParameters) {
  const auto words = SyntheticWords(15);
  ToyEncoder enc(words, 4, Pooling::kMax, 2);
  const auto before = enc.params();
  Rng rng(1);
  TrainEncoder(enc, {RandomBatch(words, 4, 1, 4, rng)},
               Config(ObjectiveKind::kPoolCosine), 20, 0.0);
  EXPECT_EQ(enc.params(), before);
}

TEST(TrainTest, TouchedIndicesAreEncoderParameters) {
  const auto words = SyntheticWords(15);
  const ToyEncoder enc(words, 4, Pooling::kMean, 2);
  Rng rng(3);
  const auto r = EvaluateObjective(enc, RandomBatch(words, 4, 1, 4, rng),
                                   Config(ObjectiveKind::kRanking));
  EXPECT_EQ(r.gradient.size(), enc.size());
  for (size_t p : r.touched) EXPECT_LT(p, enc.size());
  for (size_t p = 0; p < r.gradient.size(); ++p) {
    if (r.gradient[p] != 0.0) {
      EXPECT_TRUE(std::binary_search(r.touched.begin(), r.touched.end(), p));
    }
  }
}

TEST(TrainTest, SentenceAlignTraceReproducible) {
  const auto words = SyntheticWords(30);
  std::vector<Batch> batches;
  Rng rng(12);
  for (int b = 0; b < 4; ++b) batches.push_back(RandomBatch(words, 6, 2, 6, rng));
  const auto cfg = Config(ObjectiveKind::kSentenceAlign);
  ToyEncoder a(words, 8, cfg.pooling, 5), b(words, 8, cfg.pooling, 5);
  const auto ta = TrainEncoder(a, batches, cfg, 50, 0.1);
  const auto tb = TrainEncoder(b, batches, cfg, 50, 0.1);
  EXPECT_EQ(FormatTraceCsv(ta), FormatTraceCsv(tb));
  EXPECT_EQ(a.params(), b.params());
  EXPECT_EQ(FormatTraceCsv(ta).substr(0, 20), "step,loss,grad_norm\n");
}

TEST(TrainTest, DivergenceAborts) {
  const auto words = SyntheticWords(10);
  ToyEncoder enc(words, 4, Pooling::kMean, 1);
  Rng rng(2);
  const auto batch = RandomBatch(words, 4, 1, 3, rng);
  EXPECT_THROW(TrainEncoder(enc, {batch}, Config(ObjectiveKind::kRanking), 200, 1e200),
               std::runtime_error);
}

TEST(EncoderFileTest, SaveLoad) {
  synthetic::TempDir dir("encoder");
  const ToyEncoder enc(SyntheticWords(7), 3, Pooling::kMean, 4);
  enc.Save(dir.File("enc.tsv"));
  const ToyEncoder back = ToyEncoder::Load(dir.File("enc.tsv"));
  EXPECT_EQ(back.params(), enc.params());
  EXPECT_EQ(back.pooling(), enc.pooling());
  EXPECT_EQ(back.Id("w3"), enc.Id("w3"));
  EXPECT_EQ(synthetic::Slurp(dir.File("enc.tsv")).substr(0, 46),
            "#csmix-encoder version=1 vocab=8 d=3 pooling=m");
}

TEST(ConfigTest, Validation) {
  auto c = Config(ObjectiveKind::kNegMargin);
  c.delta = -0.1;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = Config(ObjectiveKind::kAms);
  c.margin = -1;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  EXPECT_THROW(ParseObjectiveKind("cosine"), std::invalid_argument);
  for (ObjectiveKind k : kAllKinds) {
    EXPECT_EQ(ParseObjectiveKind(ObjectiveKindName(k)), k);
  }
}

}  // namespace
}  // namespace csmix
