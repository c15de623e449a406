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

// Synthetic corpora with gold alignments known by construction.
#ifndef CSMIX_TESTS_SUPPORT_SYNTHETIC_H_
#define CSMIX_TESTS_SUPPORT_SYNTHETIC_H_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iterator>
#include <string>
#include <utility>
#include <vector>

#include "csmix/aligner.h"
#include "csmix/rng.h"
#include "csmix/types.h"

namespace csmix::synthetic {

struct GoldCorpus {
  std::vector<SentencePair> pairs;
  std::vector<AlignmentLinkSet> gold;
};

// Word k of the source maps to word k of the target: "sK" <-> "tK".
// Lengths uniform in [min_len, max_len]; words uniform over the vocabulary.
// With `reversed` the target is written right to left.
inline GoldCorpus DictionaryCorpus(size_t n, size_t min_len, size_t max_len,
                                   size_t vocab, uint64_t seed,
                                   bool reversed = false) {
  GoldCorpus c;
  Rng rng(seed);
  for (size_t p = 0; p < n; ++p) {
    const size_t len = min_len + rng.Index(max_len - min_len + 1);
    SentencePair pair{{{}, "en"}, {{}, "fr"}, std::nullopt};
    std::vector<std::pair<int, int>> links;
    for (size_t i = 0; i < len; ++i) {
      const size_t w = rng.Index(vocab);
      pair.source.tokens.push_back("s" + std::to_string(w));
      pair.target.tokens.push_back("t" + std::to_string(w));
    }
    if (reversed) {
      std::reverse(pair.target.tokens.begin(), pair.target.tokens.end());
    }
    for (size_t i = 0; i < len; ++i) {
      links.emplace_back(static_cast<int>(i),
                         static_cast<int>(reversed ? len - 1 - i : i));
    }
    c.pairs.push_back(std::move(pair));
    c.gold.emplace_back(std::move(links), len, len);
  }
  return c;
}

// Pairs built from a sequence of units: with probability `phrase_rate` a
// two-word phrase aligned as a 2 x 2 block (three links), otherwise a single
// word aligned one to one. Lengths count source tokens and are at least
// min_len. The two languages share no words.
inline GoldCorpus PhraseCorpus(size_t n, size_t min_len, size_t max_len,
                               double phrase_rate, size_t vocab,
                               uint64_t seed) {
  GoldCorpus c;
  Rng rng(seed);
  for (size_t p = 0; p < n; ++p) {
    const size_t target_len = min_len + rng.Index(max_len - min_len + 1);
    SentencePair pair{{{}, "en"}, {{}, "fr"}, std::nullopt};
    std::vector<std::pair<int, int>> links;
    while (pair.source.size() < target_len) {
      const int s = static_cast<int>(pair.source.size());
      const int t = static_cast<int>(pair.target.size());
      if (pair.source.size() + 2 <= target_len && rng.Bernoulli(phrase_rate)) {
        const size_t w = rng.Index(vocab);
        pair.source.tokens.push_back("e" + std::to_string(w) + "a");
        pair.source.tokens.push_back("e" + std::to_string(w) + "b");
        pair.target.tokens.push_back("f" + std::to_string(w) + "a");
        pair.target.tokens.push_back("f" + std::to_string(w) + "b");
        links.insert(links.end(), {{s, t}, {s, t + 1}, {s + 1, t + 1}});
      } else {
        const size_t w = rng.Index(vocab);
        pair.source.tokens.push_back("e" + std::to_string(w));
        pair.target.tokens.push_back("f" + std::to_string(w));
        links.emplace_back(s, t);
      }
    }
    const size_t s_len = pair.source.size();
    const size_t t_len = pair.target.size();
    c.pairs.push_back(std::move(pair));
    c.gold.emplace_back(std::move(links), s_len, t_len);
  }
  return c;
}

// Temporary directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::hash<std::string>{}(tag) ^ static_cast<uint64_t>(
                std::chrono::steady_clock::now().time_since_epoch().count()));
    path_ = std::filesystem::temp_directory_path() /
            ("csmix-" + tag + "-" + std::to_string(rng.Next() % 1000000007));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string File(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void Spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline void WriteCorpus(const GoldCorpus& c, const std::string& src,
                        const std::string& tgt, const std::string& align) {
  std::string s, t, a;
  for (size_t i = 0; i < c.pairs.size(); ++i) {
    s += JoinTokens(c.pairs[i].source.tokens) + "\n";
    t += JoinTokens(c.pairs[i].target.tokens) + "\n";
    a += c.gold[i].ToPharaoh() + "\n";
  }
  Spit(src, s);
  Spit(tgt, t);
  if (!align.empty()) Spit(align, a);
}

}  // namespace csmix::synthetic

#endif  // CSMIX_TESTS_SUPPORT_SYNTHETIC_H_
