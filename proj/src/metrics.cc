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

#include "csmix/metrics.h"

#include <unicode/unistr.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "csmix/corpus_io.h"
#include "csmix/format.h"

namespace csmix {
namespace {

using NgramCounts = std::map<std::vector<std::string>, size_t>;

NgramCounts CountNgrams(const std::vector<std::string>& tokens, size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i,
                                      tokens.begin() + i + n)];
  }
  return counts;
}

std::string Lowercase(const std::string& text) {
  std::string out;
  icu::UnicodeString::fromUTF8(text).toLower().toUTF8String(out);
  return out;
}

std::string XmlEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

Histogram Bucketed(const std::vector<size_t>& values, size_t width,
                   std::string title, std::string x_label) {
  if (width == 0) throw std::invalid_argument("bin width must be positive");
  Histogram h;
  h.title = std::move(title);
  h.x_label = std::move(x_label);
  if (values.empty()) return h;
  const size_t bins = *std::max_element(values.begin(), values.end()) / width + 1;
  h.counts.assign(bins, 0);
  for (size_t b = 0; b <= bins; ++b) {
    h.edges.push_back(static_cast<double>(b * width));
  }
  for (size_t v : values) ++h.counts[v / width];
  return h;
}

}  // namespace

void BleuConfig::Validate() const {
  if (max_ngram < 1) throw std::invalid_argument("max_ngram must be >= 1");
}

BleuSmoothing ParseBleuSmoothing(const std::string& name) {
  if (name == "none") return BleuSmoothing::kNone;
  if (name == "exp") return BleuSmoothing::kExponential;
  throw std::invalid_argument("unknown smoothing '" + name + "'");
}

BleuTokenizer ParseBleuTokenizer(const std::string& name) {
  if (name == "none") return BleuTokenizer::kNone;
  if (name == "13a") return BleuTokenizer::k13a;
  throw std::invalid_argument("unknown BLEU tokenizer '" + name + "'");
}

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (size_t n = 0; n < matches.size(); ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  hyp_len += o.hyp_len;
  ref_len += o.ref_len;
  return *this;
}

BleuStats SentenceStats(const std::vector<std::string>& hyp,
                        const std::vector<std::string>& ref, int max_ngram) {
  BleuStats stats(max_ngram);
  stats.hyp_len = hyp.size();
  stats.ref_len = ref.size();
  for (size_t n = 1; n <= static_cast<size_t>(max_ngram); ++n) {
    const auto h = CountNgrams(hyp, n);
    const auto r = CountNgrams(ref, n);
    for (const auto& [gram, count] : h) {
      stats.totals[n - 1] += count;
      const auto it = r.find(gram);
      if (it != r.end()) stats.matches[n - 1] += std::min(count, it->second);
    }
  }
  return stats;
}

BleuResult ScoreStats(const BleuStats& stats, const BleuConfig& config) {
  BleuResult result;
  result.stats = stats;
  result.config = config;
  const size_t orders = stats.matches.size();
  result.precisions.assign(orders, 0.0);
  double log_sum = 0.0;
  size_t used = 0;
  bool zero = false;
  double smooth = 1.0;
  for (size_t n = 0; n < orders; ++n) {
    if (stats.totals[n] == 0) continue;
    ++used;
    const double total = static_cast<double>(stats.totals[n]);
    double p = static_cast<double>(stats.matches[n]) / total;
    if (stats.matches[n] == 0) {
      if (config.smoothing == BleuSmoothing::kExponential) {
        smooth *= 2.0;
        p = 1.0 / (smooth * total);
      } else {
        zero = true;
      }
    }
    result.precisions[n] = p;
    if (p > 0.0) log_sum += std::log(p);
  }
  if (stats.hyp_len == 0) {
    result.bp = 0.0;
  } else {
    const double ratio = static_cast<double>(stats.ref_len) /
                         static_cast<double>(stats.hyp_len);
    result.bp = std::exp(std::min(0.0, 1.0 - ratio));
  }
  if (zero || used == 0) {
    result.score = 0.0;
  } else {
    result.score =
        100.0 * result.bp * std::exp(log_sum / static_cast<double>(used));
  }
  return result;
}

std::string BleuResult::ToJson() const {
  nlohmann::ordered_json j;
  j["score"] = score;
  j["precisions"] = precisions;
  j["bp"] = bp;
  j["counts"] = stats.matches;
  j["totals"] = stats.totals;
  j["hyp_len"] = stats.hyp_len;
  j["ref_len"] = stats.ref_len;
  j["config"] = {
      {"max_ngram", config.max_ngram},
      {"case_sensitive", config.case_sensitive},
      {"smoothing",
       config.smoothing == BleuSmoothing::kNone ? "none" : "exp"},
      {"tokenizer", config.tokenizer == BleuTokenizer::kNone ? "none" : "13a"}};
  return j.dump(2);
}

std::vector<std::string> Tokenize13a(const std::string& text) {
  static const std::regex kSymbols(R"(([\{-\~\[-\` -\&\(-\+\:-\@\/]))");
  static const std::regex kPeriodCommaAfter(R"(([^0-9])([\.,]))");
  static const std::regex kPeriodCommaBefore(R"(([\.,])([^0-9]))");
  static const std::regex kDash(R"(([0-9])(-))");
  std::string s = text;
  s = std::regex_replace(s, std::regex("<skipped>"), "");
  s = std::regex_replace(s, std::regex("-\n"), "");
  s = std::regex_replace(s, std::regex("\n"), " ");
  s = std::regex_replace(s, std::regex("&quot;"), "\"");
  s = std::regex_replace(s, std::regex("&amp;"), "&");
  s = std::regex_replace(s, std::regex("&lt;"), "<");
  s = std::regex_replace(s, std::regex("&gt;"), ">");
  s = " " + s + " ";
  s = std::regex_replace(s, kSymbols, " $1 ");
  s = std::regex_replace(s, kPeriodCommaAfter, "$1 $2 ");
  s = std::regex_replace(s, kPeriodCommaBefore, " $1 $2");
  s = std::regex_replace(s, kDash, "$1 $2 ");
  return SplitWhitespace(s);
}

std::vector<std::string> BleuTokens(const std::string& text,
                                    const BleuConfig& config) {
  const std::string cased = config.case_sensitive ? text : Lowercase(text);
  return config.tokenizer == BleuTokenizer::k13a ? Tokenize13a(cased)
                                                 : SplitWhitespace(cased);
}

BleuResult CorpusBleu(const std::vector<std::string>& hyps,
                      const std::vector<std::string>& refs,
                      const BleuConfig& config) {
  config.Validate();
  if (hyps.size() != refs.size()) {
    throw std::invalid_argument("hypotheses and references differ in count (" +
                                std::to_string(hyps.size()) + " vs " +
                                std::to_string(refs.size()) + ")");
  }
  if (hyps.empty()) throw std::invalid_argument("empty corpus");
  BleuStats total(config.max_ngram);
  for (size_t i = 0; i < hyps.size(); ++i) {
    total += SentenceStats(BleuTokens(hyps[i], config),
                           BleuTokens(refs[i], config), config.max_ngram);
  }
  return ScoreStats(total, config);
}

BleuResult CorpusBleu(const std::vector<Sentence>& hyps,
                      const std::vector<Sentence>& refs,
                      const BleuConfig& config) {
  // Tokenized input is scored as is; 13a scores the detokenized text.
  auto text = [&](const Sentence& s) {
    return config.tokenizer == BleuTokenizer::k13a ? Detokenize(s)
                                                   : JoinTokens(s.tokens);
  };
  std::vector<std::string> h, r;
  for (const auto& s : hyps) h.push_back(text(s));
  for (const auto& s : refs) r.push_back(text(s));
  return CorpusBleu(h, r, config);
}

RefSide ParseRefSide(const std::string& name) {
  if (name == "matrix") return RefSide::kMatrix;
  if (name == "embedded") return RefSide::kEmbedded;
  throw std::invalid_argument("unknown reference side '" + name + "'");
}

BleuResult CopyingBaseline(const std::vector<CswRow>& rows, RefSide side,
                           const std::optional<std::string>& target_lang,
                           const BleuConfig& config) {
  std::vector<Sentence> hyps, refs;
  for (const auto& row : rows) {
    const bool matrix_ref = row.pair.target.lang == row.matrix_lang;
    if (matrix_ref != (side == RefSide::kMatrix)) continue;
    if (target_lang && row.pair.target.lang != *target_lang) continue;
    hyps.push_back(row.pair.source);
    refs.push_back(row.pair.target);
  }
  return CorpusBleu(hyps, refs, config);
}

BleuResult CopyingBaseline(const std::vector<CswRecord>& records, RefSide side,
                           const std::optional<std::string>& target_lang,
                           const BleuConfig& config) {
  std::vector<CswRow> rows;
  for (const auto& rec : records) {
    for (auto& row : EmitRows(rec)) rows.push_back(std::move(row));
  }
  return CopyingBaseline(rows, side, target_lang, config);
}

size_t Histogram::total() const {
  size_t n = 0;
  for (size_t c : counts) n += c;
  return n;
}

Histogram IntegerHistogram(const std::vector<size_t>& values, size_t width) {
  return Bucketed(values, width, "", "value");
}

Histogram LengthHistogram(const std::vector<Sentence>& corpus, size_t width) {
  std::vector<size_t> lengths;
  lengths.reserve(corpus.size());
  for (const auto& s : corpus) lengths.push_back(s.size());
  return Bucketed(lengths, width, "Sentence length", "tokens");
}

Histogram FractionHistogram(const std::vector<CswRecord>& records) {
  Histogram h;
  h.title = "Replaced fraction";
  h.x_label = "fraction of matrix tokens replaced";
  for (int b = 0; b <= 20; ++b) h.edges.push_back(b / 20.0);
  h.counts.assign(20, 0);
  for (const auto& rec : records) {
    ++h.counts[FractionBin(rec.replaced_token_count, rec.matrix_len)];
  }
  return h;
}

Histogram SpanHistogram(const std::vector<CswRecord>& records) {
  std::vector<size_t> spans;
  for (const auto& rec : records) {
    spans.insert(spans.end(), rec.replaced_spans.begin(),
                 rec.replaced_spans.end());
  }
  return Bucketed(spans, 1, "Replaced unit span", "tokens");
}

std::string RenderCsv(const Histogram& h) {
  std::ostringstream out;
  out << "bin_start,bin_end,count\n";
  for (size_t b = 0; b < h.counts.size(); ++b) {
    out << FormatDouble(h.edges[b]) << ',' << FormatDouble(h.edges[b + 1])
        << ',' << h.counts[b] << '\n';
  }
  return out.str();
}

Histogram ParseHistogramCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "bin_start,bin_end,count") {
    throw std::invalid_argument("missing histogram CSV header");
  }
  Histogram h;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::invalid_argument("malformed histogram row '" + line + "'");
    }
    const double start = ParseDouble(std::string_view(line).substr(0, c1));
    const double end =
        ParseDouble(std::string_view(line).substr(c1 + 1, c2 - c1 - 1));
    if (h.edges.empty()) h.edges.push_back(start);
    h.edges.push_back(end);
    h.counts.push_back(static_cast<size_t>(
        ParseInt(std::string_view(line).substr(c2 + 1))));
  }
  return h;
}

std::string RenderSvg(const Histogram& h) {
  constexpr int kWidth = 640, kHeight = 400, kLeft = 60, kBottom = 50,
                kTop = 40, kRight = 20;
  const int plot_w = kWidth - kLeft - kRight;
  const int plot_h = kHeight - kTop - kBottom;
  size_t peak = 0;
  for (size_t c : h.counts) peak = std::max(peak, c);
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n"
      << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << XmlEscape(h.title)
      << "</text>\n";
  const size_t bins = h.counts.size();
  for (size_t b = 0; b < bins; ++b) {
    const double x0 = kLeft + static_cast<double>(plot_w) * b / bins;
    const double w = static_cast<double>(plot_w) / bins;
    const double bh = peak == 0 ? 0.0
                                : static_cast<double>(plot_h) * h.counts[b] /
                                      static_cast<double>(peak);
    out << "<rect x=\"" << FormatFixed(x0, 2) << "\" y=\""
        << FormatFixed(kTop + plot_h - bh, 2) << "\" width=\""
        << FormatFixed(w * 0.9, 2) << "\" height=\"" << FormatFixed(bh, 2)
        << "\" fill=\"steelblue\"><title>[" << FormatDouble(h.edges[b]) << ", "
        << FormatDouble(h.edges[b + 1]) << "): " << h.counts[b]
        << "</title></rect>\n";
  }
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
      << kLeft + plot_w << "\" y2=\"" << kTop + plot_h
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\">" << XmlEscape(h.x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << kTop + plot_h / 2
      << "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
      << kTop + plot_h / 2 << ")\">" << XmlEscape(h.y_label) << " (max "
      << peak << ")</text>\n"
      << "</svg>\n";
  return out.str();
}

void WriteReports(const std::string& dir,
                  const std::map<std::string, Histogram>& histograms,
                  bool svg) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, h] : histograms) {
    const auto base = std::filesystem::path(dir) / name;
    std::ofstream csv(base.string() + ".csv", std::ios::binary);
    csv << RenderCsv(h);
    if (!csv) throw std::runtime_error("cannot write " + base.string() + ".csv");
    if (svg) {
      std::ofstream out(base.string() + ".svg", std::ios::binary);
      out << RenderSvg(h);
      if (!out) {
        throw std::runtime_error("cannot write " + base.string() + ".svg");
      }
    }
  }
}

}  // namespace csmix
