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

#ifndef CSMIX_SUBWORD_H_
#define CSMIX_SUBWORD_H_

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csmix/types.h"

namespace csmix {

// Byte-pair-encoding model.
//
// Learning follows the greedy merge procedure: words are split into code
// points with an end-of-word marker glued to the last symbol, and the most
// frequent adjacent pair is merged repeatedly. Frequency ties go to the
// lexicographically greatest pair.
//
// Applied output marks every non-final piece of a word with the
// continuation suffix "@@", so RemoveBpe only has to join pieces.
class BpeModel {
 public:
  using Merge = std::pair<std::string, std::string>;

  static constexpr const char* kEndOfWord = "</w>";
  static constexpr const char* kContinuation = "@@";

  BpeModel() = default;
  explicit BpeModel(std::vector<Merge> merges);

  const std::vector<Merge>& merges() const { return merges_; }
  size_t merge_count() const { return merges_.size(); }

  // Splits one word into subword pieces (continuation-marked).
  std::vector<std::string> SegmentWord(const std::string& word) const;

  // Header line, then one "left right" merge per line.
  void Save(const std::string& path) const;
  static BpeModel Load(const std::string& path);
  std::string HeaderLine() const;

 private:
  std::vector<Merge> merges_;
  std::unordered_map<std::string, size_t> rank_;  // key: left + ' ' + right
};

// Learns up to merge_count merges over all sentences jointly. Throws
// std::invalid_argument when merge_count <= 0 or the corpus has no tokens.
BpeModel LearnBpe(const std::vector<Sentence>& corpus, int merge_count);

// Reserved tags such as "<2fr>" pass through unsplit.
Sentence ApplyBpe(const BpeModel& model, const Sentence& s);

// Joins continuation-marked pieces back into words.
Sentence RemoveBpe(const Sentence& s);

}  // namespace csmix

#endif  // CSMIX_SUBWORD_H_
