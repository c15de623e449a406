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

#ifndef CSMIX_TYPES_H_
#define CSMIX_TYPES_H_

#include <optional>
#include <string>
#include <vector>

namespace csmix {

// Language id used for code-switched sentences.
inline constexpr const char kMixedLang[] = "mixed";

// A tokenized sentence. Tokens never contain whitespace and are non-empty.
struct Sentence {
  std::vector<std::string> tokens;
  std::string lang;

  size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool operator==(const Sentence&) const = default;
};

// A source/target pair. The optional tag ("<2xx>") names the language the
// source should be translated into; it is kept out of `source.tokens` so
// that length and budget accounting never see it.
struct SentencePair {
  Sentence source;
  Sentence target;
  std::optional<std::string> tag;

  bool operator==(const SentencePair&) const = default;
};

// The two configured languages of a bilingual setup.
struct LanguagePair {
  std::string first = "en";
  std::string second = "fr";

  bool Contains(const std::string& lang) const {
    return lang == first || lang == second;
  }
  // Returns the other language of the pair. `lang` must be one of the two.
  const std::string& Other(const std::string& lang) const;
};

// Joins tokens with single spaces.
std::string JoinTokens(const std::vector<std::string>& tokens);

// Splits on ASCII whitespace, dropping empty fields.
std::vector<std::string> SplitWhitespace(const std::string& line);

}  // namespace csmix

#endif  // CSMIX_TYPES_H_
