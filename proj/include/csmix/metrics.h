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

#ifndef CSMIX_METRICS_H_
#define CSMIX_METRICS_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csmix/generator.h"
#include "csmix/types.h"

namespace csmix {

enum class BleuSmoothing { kNone, kExponential };
enum class BleuTokenizer { kNone, k13a };

struct BleuConfig {
  int max_ngram = 4;
  bool case_sensitive = true;
  BleuSmoothing smoothing = BleuSmoothing::kNone;
  // kNone scores tokens as given; k13a re-tokenizes detokenized text.
  BleuTokenizer tokenizer = BleuTokenizer::kNone;

  void Validate() const;
};

BleuSmoothing ParseBleuSmoothing(const std::string& name);
BleuTokenizer ParseBleuTokenizer(const std::string& name);

// Corpus-level sufficient statistics.
struct BleuStats {
  std::vector<size_t> matches;  // clipped, per order
  std::vector<size_t> totals;
  size_t hyp_len = 0;
  size_t ref_len = 0;

  explicit BleuStats(int max_ngram = 4)
      : matches(static_cast<size_t>(max_ngram), 0),
        totals(static_cast<size_t>(max_ngram), 0) {}
  BleuStats& operator+=(const BleuStats& o);
};

struct BleuResult {
  double score = 0.0;  // in [0, 100]
  std::vector<double> precisions;
  double bp = 0.0;
  BleuStats stats;
  BleuConfig config;

  std::string ToJson() const;
};

BleuStats SentenceStats(const std::vector<std::string>& hyp,
                        const std::vector<std::string>& ref, int max_ngram);

// 100 * BP * exp(mean log p_n), BP = exp(min(0, 1 - r/c)). Orders with no
// hypothesis n-grams at all are left out of the mean (the hypotheses are too
// short to have any); a zero match count elsewhere gives 0 unless smoothed.
BleuResult ScoreStats(const BleuStats& stats, const BleuConfig& config);

// 13a-style tokenization of detokenized text.
std::vector<std::string> Tokenize13a(const std::string& text);

// Tokens used for scoring a line of text under the config.
std::vector<std::string> BleuTokens(const std::string& text,
                                    const BleuConfig& config);

// Throws std::invalid_argument on a length mismatch or an empty corpus.
BleuResult CorpusBleu(const std::vector<std::string>& hyps,
                      const std::vector<std::string>& refs,
                      const BleuConfig& config);
BleuResult CorpusBleu(const std::vector<Sentence>& hyps,
                      const std::vector<Sentence>& refs,
                      const BleuConfig& config);

enum class RefSide { kMatrix, kEmbedded };

RefSide ParseRefSide(const std::string& name);

// Scores each code-switched source as its own hypothesis. A row's reference
// is on the matrix side when its target language is the matrix language.
// With `target_lang` only rows translating into that language are used.
BleuResult CopyingBaseline(const std::vector<CswRow>& rows, RefSide side,
                           const std::optional<std::string>& target_lang,
                           const BleuConfig& config);
BleuResult CopyingBaseline(const std::vector<CswRecord>& records, RefSide side,
                           const std::optional<std::string>& target_lang,
                           const BleuConfig& config);

struct Histogram {
  std::string title;
  std::string x_label;
  std::string y_label = "count";
  std::vector<double> edges;  // bins + 1 entries
  std::vector<size_t> counts;

  size_t total() const;
  bool operator==(const Histogram&) const = default;
};

// Bins [0, w), [w, 2w), ... up to the one holding the largest value.
Histogram IntegerHistogram(const std::vector<size_t>& values, size_t width);
Histogram LengthHistogram(const std::vector<Sentence>& corpus, size_t width);
// Twenty bins of width 0.05 over the replaced fraction; a fully replaced
// sentence falls in the last bin.
Histogram FractionHistogram(const std::vector<CswRecord>& records);
// Matrix-side span lengths of the replaced units.
Histogram SpanHistogram(const std::vector<CswRecord>& records);

// "bin_start,bin_end,count" header then one row per bin.
std::string RenderCsv(const Histogram& h);
Histogram ParseHistogramCsv(const std::string& text);
std::string RenderSvg(const Histogram& h);

// Writes <dir>/<name>.csv (and .svg when asked) for each histogram.
void WriteReports(const std::string& dir,
                  const std::map<std::string, Histogram>& histograms,
                  bool svg);

}  // namespace csmix

#endif  // CSMIX_METRICS_H_
