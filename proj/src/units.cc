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

#include "csmix/units.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "csmix/format.h"

namespace csmix {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  size_t Find(size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void Union(size_t a, size_t b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<size_t> parent_;
};

Span ParseSpan(std::string_view text) {
  const size_t dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw std::invalid_argument("bad span '" + std::string(text) + "'");
  }
  Span s{static_cast<size_t>(ParseInt(text.substr(0, dash))),
         static_cast<size_t>(ParseInt(text.substr(dash + 1)))};
  if (s.end <= s.begin) {
    throw std::invalid_argument("empty span '" + std::string(text) + "'");
  }
  return s;
}

}  // namespace

std::vector<MinimalUnit> ExtractUnits(const AlignmentLinkSet& links) {
  links.Validate();
  const auto& L = links.links;
  const size_t k = L.size();
  if (k == 0) return {};

  // Links sharing a source or a target position are connected.
  DisjointSets sets(k);
  std::vector<long> first_by_src(links.src_len, -1);
  std::vector<long> first_by_tgt(links.tgt_len, -1);
  for (size_t i = 0; i < k; ++i) {
    long& s = first_by_src[L[i].first];
    long& t = first_by_tgt[L[i].second];
    if (s >= 0) sets.Union(i, static_cast<size_t>(s)); else s = static_cast<long>(i);
    if (t >= 0) sets.Union(i, static_cast<size_t>(t)); else t = static_cast<long>(i);
  }

  // Covering spans per group; merge groups whose spans overlap to fixpoint.
  bool merged = true;
  while (merged) {
    merged = false;
    std::vector<MinimalUnit> box(k);
    std::vector<char> seen(k, 0);
    for (size_t i = 0; i < k; ++i) {
      const size_t r = sets.Find(i);
      const size_t s = static_cast<size_t>(L[i].first);
      const size_t t = static_cast<size_t>(L[i].second);
      if (!seen[r]) {
        box[r] = {{s, s + 1}, {t, t + 1}, 0};
        seen[r] = 1;
      } else {
        box[r].src = {std::min(box[r].src.begin, s),
                      std::max(box[r].src.end, s + 1)};
        box[r].tgt = {std::min(box[r].tgt.begin, t),
                      std::max(box[r].tgt.end, t + 1)};
      }
    }
    // A link inside another group's span forces the two together. Two spans
    // overlap exactly when one holds an endpoint link of the other.
    for (size_t r = 0; r < k; ++r) {
      if (!seen[r]) continue;
      for (size_t p = box[r].src.begin; p < box[r].src.end; ++p) {
        const long other = first_by_src[p];
        if (other >= 0 && sets.Find(static_cast<size_t>(other)) != sets.Find(r)) {
          sets.Union(r, static_cast<size_t>(other));
          merged = true;
        }
      }
      for (size_t p = box[r].tgt.begin; p < box[r].tgt.end; ++p) {
        const long other = first_by_tgt[p];
        if (other >= 0 && sets.Find(static_cast<size_t>(other)) != sets.Find(r)) {
          sets.Union(r, static_cast<size_t>(other));
          merged = true;
        }
      }
    }
  }

  std::vector<MinimalUnit> units;
  std::vector<long> index(k, -1);
  for (size_t i = 0; i < k; ++i) {
    const size_t r = sets.Find(i);
    const size_t s = static_cast<size_t>(L[i].first);
    const size_t t = static_cast<size_t>(L[i].second);
    if (index[r] < 0) {
      index[r] = static_cast<long>(units.size());
      units.push_back({{s, s + 1}, {t, t + 1}, 0});
    }
    auto& u = units[static_cast<size_t>(index[r])];
    u.src = {std::min(u.src.begin, s), std::max(u.src.end, s + 1)};
    u.tgt = {std::min(u.tgt.begin, t), std::max(u.tgt.end, t + 1)};
    ++u.link_count;
  }
  std::sort(units.begin(), units.end(),
            [](const MinimalUnit& a, const MinimalUnit& b) {
              return a.src.begin < b.src.begin;
            });
  return units;
}

std::map<size_t, size_t> UnitSpanHistogram(
    const std::vector<MinimalUnit>& units, UnitSide side) {
  std::map<size_t, size_t> hist;
  for (const auto& u : units) {
    ++hist[side == UnitSide::kSource ? u.src.length() : u.tgt.length()];
  }
  return hist;
}

std::string FormatUnits(const std::vector<MinimalUnit>& units) {
  std::string out;
  for (size_t i = 0; i < units.size(); ++i) {
    if (i > 0) out.push_back(' ');
    const auto& u = units[i];
    out += std::to_string(u.src.begin) + '-' + std::to_string(u.src.end) + ':' +
           std::to_string(u.tgt.begin) + '-' + std::to_string(u.tgt.end);
  }
  return out;
}

std::vector<MinimalUnit> ParseUnits(const std::string& line) {
  std::vector<MinimalUnit> units;
  for (const auto& field : SplitWhitespace(line)) {
    const size_t colon = field.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("bad unit '" + field + "'");
    }
    const std::string_view view(field);
    units.push_back(
        {ParseSpan(view.substr(0, colon)), ParseSpan(view.substr(colon + 1)), 0});
  }
  return units;
}

}  // namespace csmix
