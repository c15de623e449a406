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

#include "csmix/types.h"

#include <stdexcept>

namespace csmix {

const std::string& LanguagePair::Other(const std::string& lang) const {
  if (lang == first) return second;
  if (lang == second) return first;
  throw std::invalid_argument("language '" + lang + "' is not configured");
}

std::string JoinTokens(const std::vector<std::string>& tokens) {
  std::string out;
  size_t size = 0;
  for (const auto& t : tokens) size += t.size() + 1;
  out.reserve(size);
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::vector<std::string> out;
  size_t i = 0;
  const size_t n = line.size();
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (i < n) {
    while (i < n && is_space(line[i])) ++i;
    const size_t start = i;
    while (i < n && !is_space(line[i])) ++i;
    if (i > start) out.emplace_back(line, start, i - start);
  }
  return out;
}

}  // namespace csmix
