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

#ifndef CSMIX_OBJECTIVES_H_
#define CSMIX_OBJECTIVES_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csmix/aligner.h"
#include "csmix/rng.h"
#include "csmix/types.h"

namespace csmix {

enum class Pooling { kMax, kMean };

Pooling ParsePooling(const std::string& name);
std::string PoolingName(Pooling pooling);

// Embedding table plus pooling. Row 0 is the unknown word. Parameters are a
// flat row-major vocab x d array so every entry can be perturbed directly.
class ToyEncoder {
 public:
  ToyEncoder() = default;
  // Rows are drawn from N(0, init_scale^2) with a seeded generator.
  ToyEncoder(const std::vector<std::string>& words, size_t dim,
             Pooling pooling, uint64_t seed, double init_scale = 0.5);

  static constexpr const char kUnknown[] = "<unk>";

  int Id(const std::string& word) const;
  std::vector<int> Ids(const Sentence& s) const;

  // Pooled representation with the encoder's own pooling, or an explicit
  // one. Throws std::invalid_argument for an empty sentence.
  std::vector<double> Encode(const Sentence& s) const;
  std::vector<double> Encode(const Sentence& s, Pooling pooling) const;

  size_t dim() const { return dim_; }
  size_t vocab_size() const { return vocab_.size(); }
  const std::string& Word(int id) const { return vocab_.Word(id); }
  Pooling pooling() const { return pooling_; }
  size_t size() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // Header "#csmix-encoder version=1 vocab=V d=D pooling=P", then one
  // "word \t values" row per vocabulary entry.
  void Save(const std::string& path) const;
  static ToyEncoder Load(const std::string& path);

 private:
  Vocab vocab_;
  size_t dim_ = 0;
  Pooling pooling_ = Pooling::kMax;
  std::vector<double> params_;
};

// Collects every distinct token of the sentences, in first-seen order.
std::vector<std::string> CollectWords(const std::vector<Sentence>& sentences);

enum class ObjectiveKind {
  kPoolCosine,     // -cos(Enc(x), Enc(y)), max pooling
  kNegMargin,      // max(0, delta - cos(x, y) + cos(x, y')), mean pooling
  kRanking,        // log-softmax of u.v over y and K in-batch negatives
  kAms,            // ranking with the positive logit reduced by m
  kSentenceAlign,  // log-softmax of c_x.c_y over the candidate pool
};

ObjectiveKind ParseObjectiveKind(const std::string& name);
std::string ObjectiveKindName(ObjectiveKind kind);

enum class Reduction { kMean, kSum };

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::kPoolCosine;
  Pooling pooling = Pooling::kMax;
  double delta = 0.4;
  double margin = 0.3;
  double weight = 10.0;
  // In-batch negatives per item; negative means batch size - 1.
  int negatives = -1;
  Reduction reduction = Reduction::kMean;

  // Defaults for a kind: max pooling and weight 10 for pool_cosine, mean
  // pooling otherwise, weight 1 elsewhere.
  static ObjectiveConfig ForKind(ObjectiveKind kind);
  void Validate() const;
};

struct Example {
  Sentence x;
  Sentence y;
  // Explicit negative for neg_margin; the next item's y when absent.
  std::optional<Sentence> y_neg;
};

struct Batch {
  std::vector<Example> items;
  // Extra sentence_align candidates beyond the batch targets.
  std::vector<Sentence> extra_candidates;
};

struct ObjectiveReport {
  double loss = 0.0;  // weighted
  std::vector<double> gradient;  // weighted, one entry per parameter
  size_t items = 0;           // items that contributed
  size_t skipped_items = 0;   // zero-norm pooled vectors
  std::vector<size_t> touched;  // parameter indices read by the batch
  double gradcheck_max_rel_err = 0.0;
};

// Loss and analytic gradient for one batch. Negatives for item i are the
// targets of items i+1 .. i+K (cyclic). Throws std::invalid_argument on
// invalid configuration.
ObjectiveReport EvaluateObjective(const ToyEncoder& encoder,
                                  const Batch& batch,
                                  const ObjectiveConfig& config);

// Loss only, used by the finite-difference check.
double ObjectiveLoss(const ToyEncoder& encoder, const Batch& batch,
                     const ObjectiveConfig& config);

struct GradcheckResult {
  double max_rel_err = 0.0;
  size_t checked = 0;
  // Parameters whose perturbation crossed a non-smooth point (a change of
  // max-pooling winner or of the active hinge set).
  size_t skipped = 0;
};

// Central differences over every parameter touched by the batch. Relative
// error is |a - n| / max(1e-8, |a| + |n|). An empty batch gives 0.
GradcheckResult Gradcheck(const ToyEncoder& encoder, const Batch& batch,
                          const ObjectiveConfig& config, double step = 1e-5);

struct TraceRow {
  size_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
};

// Plain gradient descent on w * loss, cycling over the batches. Only the
// encoder parameters exist here, so those are the only ones updated.
// Throws std::runtime_error if the loss becomes non-finite.
std::vector<TraceRow> TrainEncoder(ToyEncoder& encoder,
                                   const std::vector<Batch>& batches,
                                   const ObjectiveConfig& config, size_t steps,
                                   double learning_rate);

std::string FormatTraceCsv(const std::vector<TraceRow>& trace);

double Cosine(const std::vector<double>& a, const std::vector<double>& b);

// Words "w0" .. "w{n-1}".
std::vector<std::string> SyntheticWords(size_t n);

// Batch of random sentences over `words`, lengths uniform in
// [min_len, max_len].
Batch RandomBatch(const std::vector<std::string>& words, size_t batch_size,
                  size_t min_len, size_t max_len, Rng& rng);

}  // namespace csmix

#endif  // CSMIX_OBJECTIVES_H_
