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

#ifndef CSMIX_ALIGNER_H_
#define CSMIX_ALIGNER_H_

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csmix/types.h"

namespace csmix {

// Word <-> integer map. Case-sensitive, exact string match.
class Vocab {
 public:
  int Intern(const std::string& word);
  std::optional<int> Find(const std::string& word) const;
  const std::string& Word(int id) const { return words_.at(id); }
  size_t size() const { return words_.size(); }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> words_;
};

// Source vocabularies reserve id 0 for the NULL word.
inline constexpr int kNullWord = 0;
inline constexpr const char kNullToken[] = "<null>";

// Sparse lexical table t(f | e) over co-occurring (e, f) pairs. Rows are
// stored contiguously in (e, f) order so every reduction over a row runs in
// a fixed order. Unseen pairs read as the probability floor.
class TranslationTable {
 public:
  TranslationTable() = default;

  // Builds the support from unique (e, f) keys and sets each row uniform.
  TranslationTable(std::vector<uint64_t> keys, double floor);

  static uint64_t Key(int e, int f) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(e)) << 32) |
           static_cast<uint32_t>(f);
  }
  static int KeySource(uint64_t key) { return static_cast<int>(key >> 32); }
  static int KeyTarget(uint64_t key) {
    return static_cast<int>(key & 0xffffffffu);
  }

  // Position of (e, f) in the support, or -1.
  int64_t Slot(int e, int f) const;
  double Prob(int e, int f) const;
  double SlotProb(size_t slot) const { return probs_[slot]; }
  void SetSlotProb(size_t slot, double p) { probs_[slot] = p; }

  // M-step: renormalizes expected counts per row. Each row is mixed with the
  // floor as (1 - n * floor) * c / total + floor, so rows sum to one and no
  // entry drops below the floor.
  void Normalize(const std::vector<double>& counts);

  double floor() const { return floor_; }
  size_t size() const { return keys_.size(); }
  const std::vector<uint64_t>& keys() const { return keys_; }

  // Sum of t(. | e) over the support of row e.
  double RowSum(int e) const;
  // Support rows as [begin, end) slot ranges.
  std::vector<std::pair<size_t, size_t>> Rows() const;

 private:
  std::vector<uint64_t> keys_;
  std::unordered_map<uint64_t, uint32_t> slot_;
  std::vector<double> probs_;
  double floor_ = 1e-9;
};

struct AlignerOptions {
  int model1_iterations = 5;
  int diagonal_iterations = 5;
  double tension = 4.0;
  double null_prob = 0.08;
  double prob_floor = 1e-9;
  int workers = 1;
  // Sentence pairs per reduction block; fixed so results do not depend on
  // the worker count.
  size_t block_size = 256;

  void Validate() const;
};

// Links are (source index, target index), sorted and unique.
struct AlignmentLinkSet {
  std::vector<std::pair<int, int>> links;
  size_t src_len = 0;
  size_t tgt_len = 0;

  AlignmentLinkSet() = default;
  AlignmentLinkSet(std::vector<std::pair<int, int>> l, size_t s, size_t t);

  // Throws std::out_of_range for links outside the sentence bounds.
  void Validate() const;
  bool Contains(int s, int t) const;
  AlignmentLinkSet Transposed() const;

  // Pharaoh format: space-separated "i-j", 0-based.
  std::string ToPharaoh() const;
  static AlignmentLinkSet FromPharaoh(const std::string& line, size_t src_len,
                                      size_t tgt_len);

  bool operator==(const AlignmentLinkSet&) const = default;
};

// Per-iteration corpus log-likelihood (natural log). Entry k is computed with
// the parameters entering iteration k; the last entry uses the final ones.
struct EmTrace {
  std::vector<double> model1;
  std::vector<double> diagonal;
};

// Lexical model shared by both training stages.
struct LexicalModel {
  Vocab src_vocab;  // id 0 is NULL
  Vocab tgt_vocab;
  TranslationTable table;
};

// IBM Model 1 from a uniform start. Throws std::invalid_argument for an
// empty corpus or iterations < 1.
LexicalModel TrainModel1(const std::vector<SentencePair>& corpus,
                         int iterations, const AlignerOptions& options,
                         std::vector<double>* log_likelihood = nullptr);

// Model 2 with a diagonal position prior:
//   p(NULL) = null_prob,
//   p(i | j) = (1 - null_prob) * exp(-tension * |j/m - i/n|) / Z(j, m, n)
// with 1-based positions i over n source words and j over m target words.
class DiagonalModel {
 public:
  DiagonalModel() = default;
  DiagonalModel(LexicalModel lexical, double tension, double null_prob);

  const LexicalModel& lexical() const { return lexical_; }
  LexicalModel& mutable_lexical() { return lexical_; }
  double tension() const { return tension_; }
  double null_prob() const { return null_prob_; }

  // Fills prior[i] for i in [0, n) for 0-based target position j.
  void PositionPrior(size_t j, size_t m, size_t n,
                     std::vector<double>& prior) const;

  // Per target position, argmax over NULL and source words of
  // t(f | e) * prior. NULL wins ties, then the smallest source index.
  AlignmentLinkSet Viterbi(const SentencePair& pair) const;

  // TSV: header line, then "e \t f \t prob" rows.
  void Save(const std::string& path) const;
  static DiagonalModel Load(const std::string& path);

 private:
  LexicalModel lexical_;
  double tension_ = 4.0;
  double null_prob_ = 0.08;
};

// Runs options.model1_iterations of Model 1 (uniform start when 0), then
// diagonal_iterations of diagonal-prior EM with fixed tension.
DiagonalModel TrainDiagonal(const std::vector<SentencePair>& corpus,
                            const AlignerOptions& options,
                            EmTrace* trace = nullptr);

AlignmentLinkSet ViterbiAlign(const DiagonalModel& model,
                              const SentencePair& pair);

// Swaps source and target.
SentencePair Reversed(const SentencePair& pair);

enum class Symmetrization { kIntersection, kUnion, kGrowDiagFinalAnd };

Symmetrization ParseSymmetrization(const std::string& name);

// `fwd` aligns source to target; `rev` is the reverse-direction alignment in
// its own orientation (target index, source index) and is transposed here.
// Throws std::invalid_argument when the sentence lengths disagree.
AlignmentLinkSet Symmetrize(const AlignmentLinkSet& fwd,
                            const AlignmentLinkSet& rev,
                            Symmetrization heuristic);

}  // namespace csmix

#endif  // CSMIX_ALIGNER_H_
