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

#ifndef CSMIX_UNITS_H_
#define CSMIX_UNITS_H_

#include <map>
#include <string>
#include <vector>

#include "csmix/aligner.h"

namespace csmix {

// Half-open token range.
struct Span {
  size_t begin = 0;
  size_t end = 0;

  size_t length() const { return end - begin; }
  bool Contains(size_t i) const { return i >= begin && i < end; }
  bool Overlaps(const Span& o) const {
    return begin < o.end && o.begin < end;
  }
  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
};

// A minimal aligned unit: contiguous source and target spans closed under
// the alignment links (every link leaving one span lands in the other) that
// cannot be split into smaller closed pairs.
struct MinimalUnit {
  Span src;
  Span tgt;
  size_t link_count = 0;

  bool operator==(const MinimalUnit&) const = default;
};

// Groups links into connected components (links sharing a row or column),
// extends each to its covering spans and merges groups whose spans overlap
// on either side until nothing changes. Unaligned tokens join no unit unless
// they fall inside a unit's span. Output is sorted by source start.
// Throws std::out_of_range for links outside the sentence.
std::vector<MinimalUnit> ExtractUnits(const AlignmentLinkSet& links);

enum class UnitSide { kSource, kTarget };

// Span length -> count.
std::map<size_t, size_t> UnitSpanHistogram(
    const std::vector<MinimalUnit>& units, UnitSide side);

// Unit dump line: "srcStart-srcEnd:tgtStart-tgtEnd" entries, space-separated.
std::string FormatUnits(const std::vector<MinimalUnit>& units);
std::vector<MinimalUnit> ParseUnits(const std::string& line);

}  // namespace csmix

#endif  // CSMIX_UNITS_H_
