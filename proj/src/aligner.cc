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

#include "csmix/aligner.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "csmix/corpus_io.h"
#include "csmix/format.h"
#include "csmix/parallel.h"

namespace csmix {

int Vocab::Intern(const std::string& word) {
  auto [it, inserted] = ids_.emplace(word, static_cast<int>(words_.size()));
  if (inserted) words_.push_back(word);
  return it->second;
}

std::optional<int> Vocab::Find(const std::string& word) const {
  auto it = ids_.find(word);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

TranslationTable::TranslationTable(std::vector<uint64_t> keys, double floor)
    : keys_(std::move(keys)), floor_(floor) {
  std::sort(keys_.begin(), keys_.end());
  keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
  slot_.reserve(keys_.size());
  for (size_t i = 0; i < keys_.size(); ++i) {
    slot_.emplace(keys_[i], static_cast<uint32_t>(i));
  }
  probs_.assign(keys_.size(), 0.0);
  for (const auto& [b, e] : Rows()) {
    for (size_t k = b; k < e; ++k) probs_[k] = 1.0 / static_cast<double>(e - b);
  }
}

int64_t TranslationTable::Slot(int e, int f) const {
  if (e < 0 || f < 0) return -1;
  auto it = slot_.find(Key(e, f));
  return it == slot_.end() ? -1 : static_cast<int64_t>(it->second);
}

double TranslationTable::Prob(int e, int f) const {
  const int64_t s = Slot(e, f);
  return s < 0 ? floor_ : probs_[static_cast<size_t>(s)];
}

std::vector<std::pair<size_t, size_t>> TranslationTable::Rows() const {
  std::vector<std::pair<size_t, size_t>> rows;
  size_t b = 0;
  while (b < keys_.size()) {
    const int e = KeySource(keys_[b]);
    size_t k = b;
    while (k < keys_.size() && KeySource(keys_[k]) == e) ++k;
    rows.emplace_back(b, k);
    b = k;
  }
  return rows;
}

double TranslationTable::RowSum(int e) const {
  auto lo = std::lower_bound(keys_.begin(), keys_.end(), Key(e, 0));
  double sum = 0.0;
  for (auto it = lo; it != keys_.end() && KeySource(*it) == e; ++it) {
    sum += probs_[static_cast<size_t>(it - keys_.begin())];
  }
  return sum;
}

void TranslationTable::Normalize(const std::vector<double>& counts) {
  for (const auto& [b, e] : Rows()) {
    const double n = static_cast<double>(e - b);
    double total = 0.0;
    for (size_t k = b; k < e; ++k) total += counts[k];
    if (!(total > 0.0)) {
      for (size_t k = b; k < e; ++k) probs_[k] = 1.0 / n;
      continue;
    }
    const double mass = 1.0 - n * floor_;
    for (size_t k = b; k < e; ++k) {
      probs_[k] = mass * (counts[k] / total) + floor_;
    }
  }
}

void AlignerOptions::Validate() const {
  if (model1_iterations < 0 || diagonal_iterations < 0) {
    throw std::invalid_argument("iteration counts must be >= 0");
  }
  if (!(tension > 0.0)) throw std::invalid_argument("tension must be > 0");
  if (!(null_prob >= 0.0 && null_prob < 1.0)) {
    throw std::invalid_argument("null_prob must be in [0, 1)");
  }
  if (!(prob_floor > 0.0 && prob_floor < 1e-3)) {
    throw std::invalid_argument("prob_floor must be in (0, 1e-3)");
  }
  if (block_size == 0) throw std::invalid_argument("block_size must be >= 1");
}

AlignmentLinkSet::AlignmentLinkSet(std::vector<std::pair<int, int>> l,
                                   size_t s, size_t t)
    : links(std::move(l)), src_len(s), tgt_len(t) {
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());
}

void AlignmentLinkSet::Validate() const {
  for (const auto& [s, t] : links) {
    if (s < 0 || t < 0 || static_cast<size_t>(s) >= src_len ||
        static_cast<size_t>(t) >= tgt_len) {
      throw std::out_of_range("alignment link " + std::to_string(s) + "-" +
                              std::to_string(t) + " outside " +
                              std::to_string(src_len) + "x" +
                              std::to_string(tgt_len));
    }
  }
}

bool AlignmentLinkSet::Contains(int s, int t) const {
  return std::binary_search(links.begin(), links.end(), std::make_pair(s, t));
}

AlignmentLinkSet AlignmentLinkSet::Transposed() const {
  std::vector<std::pair<int, int>> swapped;
  swapped.reserve(links.size());
  for (const auto& [s, t] : links) swapped.emplace_back(t, s);
  return AlignmentLinkSet(std::move(swapped), tgt_len, src_len);
}

std::string AlignmentLinkSet::ToPharaoh() const {
  std::string out;
  for (size_t k = 0; k < links.size(); ++k) {
    if (k > 0) out.push_back(' ');
    out += std::to_string(links[k].first);
    out.push_back('-');
    out += std::to_string(links[k].second);
  }
  return out;
}

AlignmentLinkSet AlignmentLinkSet::FromPharaoh(const std::string& line,
                                               size_t src_len,
                                               size_t tgt_len) {
  std::vector<std::pair<int, int>> links;
  for (const auto& field : SplitWhitespace(line)) {
    const size_t dash = field.find('-');
    if (dash == std::string::npos) {
      throw std::invalid_argument("bad alignment link '" + field + "'");
    }
    links.emplace_back(
        static_cast<int>(ParseInt(std::string_view(field).substr(0, dash))),
        static_cast<int>(ParseInt(std::string_view(field).substr(dash + 1))));
  }
  AlignmentLinkSet set(std::move(links), src_len, tgt_len);
  set.Validate();
  return set;
}

namespace {

struct EncodedCorpus {
  std::vector<std::vector<int>> src;
  std::vector<std::vector<int>> tgt;
};

EncodedCorpus Encode(const std::vector<SentencePair>& corpus,
                     LexicalModel& lm) {
  if (lm.src_vocab.size() == 0) lm.src_vocab.Intern(kNullToken);
  EncodedCorpus enc;
  enc.src.resize(corpus.size());
  enc.tgt.resize(corpus.size());
  for (size_t p = 0; p < corpus.size(); ++p) {
    for (const auto& w : corpus[p].source.tokens) {
      enc.src[p].push_back(lm.src_vocab.Intern(w));
    }
    for (const auto& w : corpus[p].target.tokens) {
      enc.tgt[p].push_back(lm.tgt_vocab.Intern(w));
    }
  }
  return enc;
}

LexicalModel InitLexical(const std::vector<SentencePair>& corpus,
                         double floor, EncodedCorpus& enc) {
  if (corpus.empty()) throw std::invalid_argument("alignment corpus is empty");
  LexicalModel lm;
  enc = Encode(corpus, lm);
  std::vector<uint64_t> keys;
  for (size_t p = 0; p < corpus.size(); ++p) {
    for (int f : enc.tgt[p]) {
      keys.push_back(TranslationTable::Key(kNullWord, f));
      for (int e : enc.src[p]) keys.push_back(TranslationTable::Key(e, f));
    }
  }
  lm.table = TranslationTable(std::move(keys), floor);
  return lm;
}

struct EStepPartial {
  std::vector<std::pair<uint32_t, double>> counts;
  double log_likelihood = 0.0;
};

// Fills the alignment weights of one target position: weights[0] for NULL,
// weights[1 + i] for source word i.
using PriorFn = std::function<void(size_t j, size_t m, size_t n,
                                   std::vector<double>& weights)>;

// One E-step over the corpus. When `counts` is null only the likelihood is
// computed.
double EStep(const TranslationTable& table, const EncodedCorpus& enc,
             const PriorFn& prior, const AlignerOptions& options,
             std::vector<double>* counts) {
  double total_ll = 0.0;
  BlockReduce<EStepPartial>(
      enc.src.size(), options.block_size, options.workers,
      [&](size_t, size_t begin, size_t end) {
        EStepPartial part;
        std::vector<double> weights;
        std::vector<double> post;
        std::vector<uint32_t> slots;
        for (size_t p = begin; p < end; ++p) {
          const auto& src = enc.src[p];
          const auto& tgt = enc.tgt[p];
          const size_t n = src.size();
          const size_t m = tgt.size();
          post.resize(n + 1);
          slots.resize(n + 1);
          for (size_t j = 0; j < m; ++j) {
            prior(j, m, n, weights);
            double denom = 0.0;
            for (size_t i = 0; i <= n; ++i) {
              const int e = i == 0 ? kNullWord : src[i - 1];
              const int64_t s = table.Slot(e, tgt[j]);
              slots[i] = static_cast<uint32_t>(s);
              post[i] = table.SlotProb(static_cast<size_t>(s)) * weights[i];
              denom += post[i];
            }
            part.log_likelihood += std::log(denom);
            if (counts) {
              for (size_t i = 0; i <= n; ++i) {
                part.counts.emplace_back(slots[i], post[i] / denom);
              }
            }
          }
        }
        return part;
      },
      [&](EStepPartial& part) {
        total_ll += part.log_likelihood;
        if (counts) {
          for (const auto& [slot, v] : part.counts) (*counts)[slot] += v;
        }
      });
  return total_ll;
}

void Model1Prior(size_t, size_t, size_t n, std::vector<double>& w) {
  w.assign(n + 1, 1.0 / static_cast<double>(n + 1));
}

void RunEm(LexicalModel& lm, const EncodedCorpus& enc, int iterations,
           const PriorFn& prior, const AlignerOptions& options,
           std::vector<double>* trace) {
  std::vector<double> counts;
  for (int it = 0; it < iterations; ++it) {
    counts.assign(lm.table.size(), 0.0);
    const double ll = EStep(lm.table, enc, prior, options, &counts);
    if (trace) trace->push_back(ll);
    lm.table.Normalize(counts);
  }
  if (trace) trace->push_back(EStep(lm.table, enc, prior, options, nullptr));
}

}  // namespace

LexicalModel TrainModel1(const std::vector<SentencePair>& corpus,
                         int iterations, const AlignerOptions& options,
                         std::vector<double>* log_likelihood) {
  options.Validate();
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  EncodedCorpus enc;
  LexicalModel lm = InitLexical(corpus, options.prob_floor, enc);
  RunEm(lm, enc, iterations, Model1Prior, options, log_likelihood);
  return lm;
}

DiagonalModel::DiagonalModel(LexicalModel lexical, double tension,
                             double null_prob)
    : lexical_(std::move(lexical)), tension_(tension), null_prob_(null_prob) {}

void DiagonalModel::PositionPrior(size_t j, size_t m, size_t n,
                                  std::vector<double>& prior) const {
  prior.resize(n);
  if (n == 0) return;
  const double tj = static_cast<double>(j + 1) / static_cast<double>(m);
  double z = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double si = static_cast<double>(i + 1) / static_cast<double>(n);
    prior[i] = std::exp(-tension_ * std::fabs(tj - si));
    z += prior[i];
  }
  const double scale = (1.0 - null_prob_) / z;
  for (auto& p : prior) p *= scale;
}

AlignmentLinkSet DiagonalModel::Viterbi(const SentencePair& pair) const {
  const auto& lm = lexical_;
  const size_t n = pair.source.size();
  const size_t m = pair.target.size();
  std::vector<int> src(n);
  for (size_t i = 0; i < n; ++i) {
    src[i] = lm.src_vocab.Find(pair.source.tokens[i]).value_or(-1);
  }
  std::vector<std::pair<int, int>> links;
  std::vector<double> prior;
  for (size_t j = 0; j < m; ++j) {
    const int f = lm.tgt_vocab.Find(pair.target.tokens[j]).value_or(-1);
    PositionPrior(j, m, n, prior);
    double best = lm.table.Prob(kNullWord, f) * null_prob_;
    int best_i = -1;
    for (size_t i = 0; i < n; ++i) {
      const double score = lm.table.Prob(src[i], f) * prior[i];
      if (score > best) {
        best = score;
        best_i = static_cast<int>(i);
      }
    }
    if (best_i >= 0) links.emplace_back(best_i, static_cast<int>(j));
  }
  return AlignmentLinkSet(std::move(links), n, m);
}

void DiagonalModel::Save(const std::string& path) const {
  const auto& lm = lexical_;
  std::vector<std::string> lines;
  lines.reserve(lm.table.size() + 1);
  lines.push_back("#csmix-ttable version=1 tension=" + FormatDouble(tension_) +
                  " null_prob=" + FormatDouble(null_prob_) +
                  " floor=" + FormatDouble(lm.table.floor()));
  const auto& keys = lm.table.keys();
  for (size_t k = 0; k < keys.size(); ++k) {
    lines.push_back(lm.src_vocab.Word(TranslationTable::KeySource(keys[k])) +
                    '\t' +
                    lm.tgt_vocab.Word(TranslationTable::KeyTarget(keys[k])) +
                    '\t' + FormatDouble(lm.table.SlotProb(k)));
  }
  WriteLines(path, lines);
}

DiagonalModel DiagonalModel::Load(const std::string& path) {
  const auto lines = ReadLines(path);
  if (lines.empty() || lines[0].rfind("#csmix-ttable version=1", 0) != 0) {
    throw std::runtime_error("'" + path + "' is not a csmix alignment model");
  }
  std::map<std::string, std::string> header;
  for (const auto& field : SplitWhitespace(lines[0])) {
    const size_t eq = field.find('=');
    if (eq != std::string::npos) {
      header[field.substr(0, eq)] = field.substr(eq + 1);
    }
  }
  for (const char* key : {"tension", "null_prob", "floor"}) {
    if (!header.count(key)) {
      throw std::runtime_error("alignment model header lacks '" +
                               std::string(key) + "'");
    }
  }
  LexicalModel lm;
  lm.src_vocab.Intern(kNullToken);
  std::vector<std::pair<uint64_t, double>> entries;
  entries.reserve(lines.size());
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto fields = SplitTabs(lines[i]);
    if (fields.size() != 3) {
      throw std::runtime_error("bad model row " + std::to_string(i + 1) +
                               " in '" + path + "'");
    }
    const int e = lm.src_vocab.Intern(fields[0]);
    const int f = lm.tgt_vocab.Intern(fields[1]);
    entries.emplace_back(TranslationTable::Key(e, f), ParseDouble(fields[2]));
  }
  std::vector<uint64_t> keys;
  keys.reserve(entries.size());
  for (const auto& [k, p] : entries) keys.push_back(k);
  lm.table = TranslationTable(std::move(keys), ParseDouble(header["floor"]));
  for (const auto& [k, p] : entries) {
    lm.table.SetSlotProb(static_cast<size_t>(lm.table.Slot(
                             TranslationTable::KeySource(k),
                             TranslationTable::KeyTarget(k))),
                         p);
  }
  return DiagonalModel(std::move(lm), ParseDouble(header["tension"]),
                       ParseDouble(header["null_prob"]));
}

DiagonalModel TrainDiagonal(const std::vector<SentencePair>& corpus,
                            const AlignerOptions& options, EmTrace* trace) {
  options.Validate();
  EncodedCorpus enc;
  LexicalModel lm = InitLexical(corpus, options.prob_floor, enc);
  if (options.model1_iterations > 0) {
    RunEm(lm, enc, options.model1_iterations, Model1Prior, options,
          trace ? &trace->model1 : nullptr);
  }
  DiagonalModel model(std::move(lm), options.tension, options.null_prob);
  if (options.diagonal_iterations > 0) {
    const double p0 = options.null_prob;
    PriorFn prior = [&model, p0](size_t j, size_t m, size_t n,
                                 std::vector<double>& w) {
      thread_local std::vector<double> pos;
      model.PositionPrior(j, m, n, pos);
      w.resize(n + 1);
      w[0] = p0;
      for (size_t i = 0; i < n; ++i) w[i + 1] = pos[i];
    };
    // The prior reads tension and null_prob only; the table is updated in
    // place between E-steps.
    RunEm(model.mutable_lexical(), enc, options.diagonal_iterations, prior,
          options, trace ? &trace->diagonal : nullptr);
  }
  return model;
}

AlignmentLinkSet ViterbiAlign(const DiagonalModel& model,
                              const SentencePair& pair) {
  return model.Viterbi(pair);
}

SentencePair Reversed(const SentencePair& pair) {
  return SentencePair{pair.target, pair.source, std::nullopt};
}

Symmetrization ParseSymmetrization(const std::string& name) {
  if (name == "intersection") return Symmetrization::kIntersection;
  if (name == "union") return Symmetrization::kUnion;
  if (name == "gdfa" || name == "grow-diag-final-and") {
    return Symmetrization::kGrowDiagFinalAnd;
  }
  throw std::invalid_argument("unknown symmetrization '" + name + "'");
}

AlignmentLinkSet Symmetrize(const AlignmentLinkSet& fwd,
                            const AlignmentLinkSet& rev,
                            Symmetrization heuristic) {
  if (fwd.src_len != rev.tgt_len || fwd.tgt_len != rev.src_len) {
    throw std::invalid_argument("forward and reverse alignments disagree on "
                                "sentence lengths");
  }
  fwd.Validate();
  rev.Validate();
  const AlignmentLinkSet back = rev.Transposed();
  const size_t S = fwd.src_len;
  const size_t T = fwd.tgt_len;

  std::vector<std::pair<int, int>> out;
  if (heuristic == Symmetrization::kIntersection) {
    std::set_intersection(fwd.links.begin(), fwd.links.end(),
                          back.links.begin(), back.links.end(),
                          std::back_inserter(out));
    return AlignmentLinkSet(std::move(out), S, T);
  }
  if (heuristic == Symmetrization::kUnion) {
    std::set_union(fwd.links.begin(), fwd.links.end(), back.links.begin(),
                   back.links.end(), std::back_inserter(out));
    return AlignmentLinkSet(std::move(out), S, T);
  }

  auto at = [T](size_t s, size_t t) { return s * T + t; };
  std::vector<char> in_fwd(S * T, 0), in_back(S * T, 0), aligned(S * T, 0);
  std::vector<char> src_aligned(S, 0), tgt_aligned(T, 0);
  for (const auto& [s, t] : fwd.links) in_fwd[at(s, t)] = 1;
  for (const auto& [s, t] : back.links) in_back[at(s, t)] = 1;
  auto add = [&](size_t s, size_t t) {
    aligned[at(s, t)] = 1;
    src_aligned[s] = 1;
    tgt_aligned[t] = 1;
  };
  for (size_t s = 0; s < S; ++s) {
    for (size_t t = 0; t < T; ++t) {
      if (in_fwd[at(s, t)] && in_back[at(s, t)]) add(s, t);
    }
  }

  static constexpr int kNeighbors[8][2] = {{-1, 0},  {0, -1}, {1, 0},
                                           {0, 1},   {-1, -1}, {-1, 1},
                                           {1, -1},  {1, 1}};
  bool added = true;
  while (added) {
    added = false;
    for (size_t s = 0; s < S; ++s) {
      for (size_t t = 0; t < T; ++t) {
        if (!aligned[at(s, t)]) continue;
        for (const auto& d : kNeighbors) {
          const long ns = static_cast<long>(s) + d[0];
          const long nt = static_cast<long>(t) + d[1];
          if (ns < 0 || nt < 0 || ns >= static_cast<long>(S) ||
              nt >= static_cast<long>(T)) {
            continue;
          }
          const size_t idx = at(ns, nt);
          if (aligned[idx] || !(in_fwd[idx] || in_back[idx])) continue;
          if (!src_aligned[ns] || !tgt_aligned[nt]) {
            add(ns, nt);
            added = true;
          }
        }
      }
    }
  }
  for (const auto* dir : {&in_fwd, &in_back}) {
    for (size_t s = 0; s < S; ++s) {
      for (size_t t = 0; t < T; ++t) {
        if ((*dir)[at(s, t)] && !src_aligned[s] && !tgt_aligned[t]) add(s, t);
      }
    }
  }
  for (size_t s = 0; s < S; ++s) {
    for (size_t t = 0; t < T; ++t) {
      if (aligned[at(s, t)]) {
        out.emplace_back(static_cast<int>(s), static_cast<int>(t));
      }
    }
  }
  return AlignmentLinkSet(std::move(out), S, T);
}

}  // namespace csmix
