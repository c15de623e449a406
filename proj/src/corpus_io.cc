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

#include "csmix/corpus_io.h"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "csmix/parallel.h"

namespace csmix {
namespace {

constexpr UChar32 kRightSingleQuote = 0x2019;

struct CodePoint {
  UChar32 value;
  size_t begin;
  size_t end;
};

std::vector<CodePoint> Decode(std::string_view s) {
  std::vector<CodePoint> out;
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const int32_t length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t begin = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    out.push_back({c, static_cast<size_t>(begin), static_cast<size_t>(i)});
  }
  return out;
}

bool IsApostrophe(UChar32 c) { return c == '\'' || c == kRightSingleQuote; }

bool IsDetachable(UChar32 c) {
  return c >= 0 && u_ispunct(c) && !IsApostrophe(c);
}

bool IsSeparator(UChar32 c) {
  return c < 0 || u_isUWhiteSpace(c) || u_charType(c) == U_CONTROL_CHAR;
}

std::string NormalizeNfc(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC unavailable");
  const icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  if (nfc->isNormalized(in, status) && U_SUCCESS(status)) {
    return std::string(raw);
  }
  status = U_ZERO_ERROR;
  const icu::UnicodeString normalized = nfc->normalize(in, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

constexpr std::array<std::string_view, 13> kElidedArticles = {
    "l", "d", "j", "m", "n", "s", "t", "c", "qu", "jusqu", "lorsqu",
    "puisqu", "quoiqu"};

std::string AsciiLower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return out;
}

// Byte length of the elided article at the start of `word` including its
// apostrophe, or 0 when the word does not start with one.
size_t ElisionPrefixLength(std::string_view word) {
  const auto cps = Decode(word);
  for (size_t k = 1; k < cps.size(); ++k) {
    if (!IsApostrophe(cps[k].value)) continue;
    const std::string head = AsciiLower(word.substr(0, cps[k].begin));
    if (std::find(kElidedArticles.begin(), kElidedArticles.end(), head) !=
        kElidedArticles.end()) {
      return cps[k].end;
    }
    return 0;
  }
  return 0;
}

bool IsElidedArticle(std::string_view token) {
  const size_t n = ElisionPrefixLength(token);
  return n > 0 && n == token.size();
}

void TokenizeChunk(std::string_view chunk, bool elide,
                   std::vector<std::string>& out) {
  const auto cps = Decode(chunk);
  size_t lo = 0;
  const size_t hi = cps.size();
  while (lo < hi && IsDetachable(cps[lo].value)) {
    out.emplace_back(chunk.substr(cps[lo].begin, cps[lo].end - cps[lo].begin));
    ++lo;
  }
  size_t trail = hi;
  while (trail > lo && IsDetachable(cps[trail - 1].value)) --trail;
  if (lo < trail) {
    const std::string_view core =
        chunk.substr(cps[lo].begin, cps[trail - 1].end - cps[lo].begin);
    const size_t article = elide ? ElisionPrefixLength(core) : 0;
    if (article > 0 && article < core.size()) {
      // The remainder may itself start with punctuation or another article.
      out.emplace_back(core.substr(0, article));
      TokenizeChunk(core.substr(article), elide, out);
    } else {
      out.emplace_back(core);
    }
  }
  for (size_t k = trail; k < hi; ++k) {
    out.emplace_back(chunk.substr(cps[k].begin, cps[k].end - cps[k].begin));
  }
}

enum class Attach { kNone, kLeft, kRight, kQuote };

// How a token glues to its neighbours when detokenizing.
Attach Attachment(std::string_view token) {
  const auto cps = Decode(token);
  if (cps.size() != 1 || !IsDetachable(cps[0].value)) return Attach::kNone;
  const UChar32 c = cps[0].value;
  if (c == '"') return Attach::kQuote;
  switch (u_charType(c)) {
    case U_START_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
      return Attach::kRight;
    case U_END_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
      return Attach::kLeft;
    default:
      break;
  }
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?': case '%':
    case 0x2026:  // ellipsis
    case 0x2030:  // per mille
      return Attach::kLeft;
    case 0x00BF:  // inverted question mark
    case 0x00A1:  // inverted exclamation mark
      return Attach::kRight;
    default:
      return Attach::kNone;
  }
}

}  // namespace

bool UsesElision(std::string_view lang) {
  return lang == "fr" || lang == kMixedLang;
}

Sentence Tokenize(std::string_view raw, const std::string& lang) {
  Sentence s;
  s.lang = lang;
  const std::string text = NormalizeNfc(raw);
  const bool elide = UsesElision(lang);
  const auto cps = Decode(text);
  size_t k = 0;
  while (k < cps.size()) {
    while (k < cps.size() && IsSeparator(cps[k].value)) ++k;
    const size_t start = k;
    while (k < cps.size() && !IsSeparator(cps[k].value)) ++k;
    if (k > start) {
      const size_t b = cps[start].begin;
      TokenizeChunk(std::string_view(text).substr(b, cps[k - 1].end - b),
                    elide, s.tokens);
    }
  }
  return s;
}

std::string Detokenize(const Sentence& s) {
  const bool elide = UsesElision(s.lang);
  std::string out;
  bool quote_open = false;
  bool glue_next = false;
  for (size_t i = 0; i < s.tokens.size(); ++i) {
    const std::string& tok = s.tokens[i];
    const Attach attach = Attachment(tok);
    bool space = i > 0 && !glue_next;
    if (attach == Attach::kLeft) space = false;
    if (attach == Attach::kQuote && quote_open) space = false;
    if (space) out.push_back(' ');
    out += tok;
    glue_next = attach == Attach::kRight ||
                (attach == Attach::kQuote && !quote_open) ||
                (elide && IsElidedArticle(tok));
    if (attach == Attach::kQuote) quote_open = !quote_open;
  }
  return out;
}

void CleaningPolicy::Validate() const {
  if (min_len < 1) throw std::invalid_argument("min_len must be >= 1");
  if (max_len < min_len) {
    throw std::invalid_argument("max_len must be >= min_len");
  }
  if (!(ratio_max > 1.0)) throw std::invalid_argument("ratio_max must be > 1");
}

size_t StageReport::rejected() const {
  size_t total = 0;
  for (const auto& [reason, count] : rejected_by_reason) total += count;
  return total;
}

std::string StageReport::ToJsonLine() const {
  nlohmann::ordered_json j;
  j["stage"] = stage;
  j["kept"] = kept;
  j["rejected_by_reason"] = nlohmann::ordered_json::object();
  for (const auto& [reason, count] : rejected_by_reason) {
    j["rejected_by_reason"][reason] = count;
  }
  return j.dump();
}

double LengthRatio(const SentencePair& pair) {
  const size_t a = pair.source.size();
  const size_t b = pair.target.size();
  const size_t lo = std::min(a, b);
  const size_t hi = std::max(a, b);
  if (lo == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(hi) / static_cast<double>(lo);
}

std::optional<std::string> RejectionReason(const SentencePair& pair,
                                           const CleaningPolicy& policy) {
  const size_t a = pair.source.size();
  const size_t b = pair.target.size();
  if (policy.drop_empty && (a == 0 || b == 0)) return "empty";
  if (a < policy.min_len || b < policy.min_len) return "too_short";
  if (a > policy.max_len || b > policy.max_len) return "too_long";
  if (policy.apply_ratio && LengthRatio(pair) > policy.ratio_max) {
    return "ratio";
  }
  return std::nullopt;
}

CleanResult CleanCorpus(const std::vector<SentencePair>& pairs,
                        const CleaningPolicy& policy, int workers) {
  policy.Validate();
  std::vector<std::optional<std::string>> reasons(pairs.size());
  ParallelFor(pairs.size(), workers, [&](size_t i) {
    reasons[i] = RejectionReason(pairs[i], policy);
  });
  CleanResult result;
  result.report.stage = "clean";
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (reasons[i]) {
      ++result.report.rejected_by_reason[*reasons[i]];
    } else {
      result.pairs.push_back(pairs[i]);
    }
  }
  result.report.kept = result.pairs.size();
  return result;
}

std::string MakeTag(std::string_view lang) {
  return "<2" + std::string(lang) + ">";
}

bool IsReservedTag(std::string_view token) {
  if (token.size() < 4 || token.substr(0, 2) != "<2" || token.back() != '>') {
    return false;
  }
  for (char c : token.substr(2, token.size() - 3)) {
    if (!std::islower(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

SentencePair PrependTag(SentencePair pair, const std::string& target_lang,
                        const LanguagePair& langs) {
  if (!langs.Contains(target_lang)) {
    throw std::invalid_argument("unknown language code '" + target_lang + "'");
  }
  pair.tag = MakeTag(target_lang);
  return pair;
}

std::vector<std::string> TaggedSourceTokens(const SentencePair& pair) {
  std::vector<std::string> out;
  out.reserve(pair.source.size() + 1);
  if (pair.tag) out.push_back(*pair.tag);
  out.insert(out.end(), pair.source.tokens.begin(), pair.source.tokens.end());
  return out;
}

std::vector<SentencePair> BidirectionalRows(const SentencePair& pair,
                                            const LanguagePair& langs) {
  SentencePair forward = pair;
  forward.tag.reset();
  SentencePair backward{pair.target, pair.source, std::nullopt};
  return {PrependTag(std::move(forward), pair.target.lang, langs),
          PrependTag(std::move(backward), pair.source.lang, langs)};
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void WriteLines(const std::string& path,
                const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (const auto& line : lines) out << line << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<SentencePair> ReadParallel(const std::string& src_path,
                                       const std::string& tgt_path,
                                       const std::string& src_lang,
                                       const std::string& tgt_lang) {
  const auto src = ReadLines(src_path);
  const auto tgt = ReadLines(tgt_path);
  if (src.size() != tgt.size()) {
    throw std::invalid_argument("parallel files differ in line count: " +
                             src_path + " (" + std::to_string(src.size()) +
                             ") vs " + tgt_path + " (" +
                             std::to_string(tgt.size()) + ")");
  }
  std::vector<SentencePair> pairs(src.size());
  for (size_t i = 0; i < src.size(); ++i) {
    pairs[i].source = {SplitWhitespace(src[i]), src_lang};
    pairs[i].target = {SplitWhitespace(tgt[i]), tgt_lang};
  }
  return pairs;
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string FormatRow(const SentencePair& pair) {
  return JoinTokens(TaggedSourceTokens(pair)) + '\t' +
         JoinTokens(pair.target.tokens);
}

SentencePair ParseRow(const std::string& line, const std::string& src_lang,
                      const std::string& tgt_lang) {
  const auto fields = SplitTabs(line);
  if (fields.size() < 2) {
    throw std::runtime_error("TSV row needs at least two fields: '" + line +
                             "'");
  }
  SentencePair pair;
  auto src = SplitWhitespace(fields[0]);
  if (!src.empty() && IsReservedTag(src.front())) {
    pair.tag = src.front();
    src.erase(src.begin());
  }
  pair.source = {std::move(src), src_lang};
  pair.target = {SplitWhitespace(fields[1]), tgt_lang};
  return pair;
}

}  // namespace csmix
