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

#include "csmix/subword.h"

#include <unicode/utf8.h>

#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "csmix/corpus_io.h"

namespace csmix {
namespace {

std::string MergeKey(const std::string& a, const std::string& b) {
  std::string key;
  key.reserve(a.size() + b.size() + 1);
  key += a;
  key += ' ';
  key += b;
  return key;
}

// Code points of `word`, with the end-of-word marker appended to the last.
std::vector<std::string> InitialSymbols(const std::string& word) {
  std::vector<std::string> symbols;
  const auto* bytes = reinterpret_cast<const uint8_t*>(word.data());
  const int32_t length = static_cast<int32_t>(word.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t begin = i;
    U8_FWD_1(bytes, i, length);
    symbols.emplace_back(word, begin, i - begin);
  }
  if (!symbols.empty()) symbols.back() += BpeModel::kEndOfWord;
  return symbols;
}

bool EndsWith(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

using Pair = std::pair<std::string, std::string>;

// Frequency-ordered pair statistics. Best() is the highest count, ties
// resolved toward the greatest pair.
class PairStats {
 public:
  void Add(const Pair& p, int64_t delta) {
    if (delta == 0) return;
    auto it = counts_.find(p);
    int64_t old = 0;
    if (it != counts_.end()) {
      old = it->second;
      order_.erase({old, p});
    }
    const int64_t now = old + delta;
    if (now > 0) {
      counts_[p] = now;
      order_.insert({now, p});
    } else {
      counts_.erase(p);
    }
  }

  bool empty() const { return order_.empty(); }
  const std::pair<int64_t, Pair>& Best() const { return *order_.rbegin(); }

 private:
  std::map<Pair, int64_t> counts_;
  std::set<std::pair<int64_t, Pair>> order_;
};

}  // namespace

BpeModel::BpeModel(std::vector<Merge> merges) : merges_(std::move(merges)) {
  for (size_t r = 0; r < merges_.size(); ++r) {
    const auto key = MergeKey(merges_[r].first, merges_[r].second);
    if (!rank_.emplace(key, r).second) {
      throw std::invalid_argument("duplicate BPE merge '" + key + "'");
    }
  }
}

std::vector<std::string> BpeModel::SegmentWord(const std::string& word) const {
  if (word.empty()) return {};
  std::vector<std::string> symbols = InitialSymbols(word);
  while (symbols.size() > 1) {
    size_t best_rank = SIZE_MAX;
    size_t best_pos = 0;
    for (size_t k = 0; k + 1 < symbols.size(); ++k) {
      auto it = rank_.find(MergeKey(symbols[k], symbols[k + 1]));
      if (it != rank_.end() && it->second < best_rank) {
        best_rank = it->second;
        best_pos = k;
      }
    }
    if (best_rank == SIZE_MAX) break;
    // Merge every occurrence of the best pair, left to right.
    const Merge& m = merges_[best_rank];
    std::vector<std::string> next;
    next.reserve(symbols.size());
    for (size_t k = 0; k < symbols.size(); ++k) {
      if (k + 1 < symbols.size() && k >= best_pos && symbols[k] == m.first &&
          symbols[k + 1] == m.second) {
        next.push_back(symbols[k] + symbols[k + 1]);
        ++k;
      } else {
        next.push_back(std::move(symbols[k]));
      }
    }
    symbols = std::move(next);
  }
  std::string& last = symbols.back();
  last.resize(last.size() - std::string_view(kEndOfWord).size());
  for (size_t k = 0; k + 1 < symbols.size(); ++k) symbols[k] += kContinuation;
  if (last.empty()) symbols.pop_back();
  return symbols;
}

std::string BpeModel::HeaderLine() const {
  return std::string("#csmix-bpe version=1 end_of_word=") + kEndOfWord +
         " continuation=" + kContinuation +
         " merges=" + std::to_string(merges_.size());
}

void BpeModel::Save(const std::string& path) const {
  std::vector<std::string> lines;
  lines.reserve(merges_.size() + 1);
  lines.push_back(HeaderLine());
  for (const auto& [a, b] : merges_) lines.push_back(a + ' ' + b);
  WriteLines(path, lines);
}

BpeModel BpeModel::Load(const std::string& path) {
  const auto lines = ReadLines(path);
  if (lines.empty() || lines[0].rfind("#csmix-bpe version=1", 0) != 0) {
    throw std::runtime_error("'" + path + "' is not a csmix BPE model");
  }
  if (lines[0].find(std::string("continuation=") + kContinuation) ==
      std::string::npos) {
    throw std::runtime_error("unsupported BPE marker convention in '" + path +
                             "'");
  }
  std::vector<Merge> merges;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto fields = SplitWhitespace(lines[i]);
    if (fields.size() != 2) {
      throw std::runtime_error("bad merge on line " + std::to_string(i + 1) +
                               " of '" + path + "'");
    }
    merges.emplace_back(fields[0], fields[1]);
  }
  return BpeModel(std::move(merges));
}

BpeModel LearnBpe(const std::vector<Sentence>& corpus, int merge_count) {
  if (merge_count <= 0) throw std::invalid_argument("merge_count must be > 0");

  std::map<std::string, int64_t> word_freq;
  for (const auto& s : corpus) {
    for (const auto& tok : s.tokens) {
      if (!IsReservedTag(tok)) ++word_freq[tok];
    }
  }
  if (word_freq.empty()) throw std::invalid_argument("BPE corpus is empty");

  std::vector<std::vector<std::string>> words;
  std::vector<int64_t> freqs;
  words.reserve(word_freq.size());
  for (const auto& [w, f] : word_freq) {
    words.push_back(InitialSymbols(w));
    freqs.push_back(f);
  }

  PairStats stats;
  std::map<Pair, std::set<size_t>> where;
  auto account = [&](size_t w, int sign) {
    const auto& sym = words[w];
    for (size_t k = 0; k + 1 < sym.size(); ++k) {
      Pair p{sym[k], sym[k + 1]};
      stats.Add(p, sign * freqs[w]);
      if (sign > 0) where[p].insert(w);
    }
  };
  for (size_t w = 0; w < words.size(); ++w) account(w, +1);

  std::vector<BpeModel::Merge> merges;
  while (static_cast<int>(merges.size()) < merge_count && !stats.empty()) {
    const Pair best = stats.Best().second;
    merges.push_back(best);
    const std::set<size_t> affected = where[best];
    for (size_t w : affected) {
      account(w, -1);
      auto& sym = words[w];
      std::vector<std::string> next;
      next.reserve(sym.size());
      for (size_t k = 0; k < sym.size(); ++k) {
        if (k + 1 < sym.size() && sym[k] == best.first &&
            sym[k + 1] == best.second) {
          next.push_back(sym[k] + sym[k + 1]);
          ++k;
        } else {
          next.push_back(std::move(sym[k]));
        }
      }
      sym = std::move(next);
      account(w, +1);
    }
    where.erase(best);
  }
  return BpeModel(std::move(merges));
}

Sentence ApplyBpe(const BpeModel& model, const Sentence& s) {
  Sentence out;
  out.lang = s.lang;
  out.tokens.reserve(s.tokens.size());
  for (const auto& tok : s.tokens) {
    if (IsReservedTag(tok)) {
      out.tokens.push_back(tok);
      continue;
    }
    for (auto& piece : model.SegmentWord(tok)) {
      out.tokens.push_back(std::move(piece));
    }
  }
  return out;
}

Sentence RemoveBpe(const Sentence& s) {
  Sentence out;
  out.lang = s.lang;
  std::string pending;
  bool open = false;
  for (const auto& tok : s.tokens) {
    if (EndsWith(tok, BpeModel::kContinuation)) {
      pending.append(tok, 0, tok.size() - 2);
      open = true;
      continue;
    }
    if (open) {
      out.tokens.push_back(pending + tok);
      pending.clear();
      open = false;
    } else {
      out.tokens.push_back(tok);
    }
  }
  if (open) out.tokens.push_back(pending);
  return out;
}

}  // namespace csmix
