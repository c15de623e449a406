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

#include "csmix/cli.h"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "csmix/aligner.h"
#include "csmix/corpus_io.h"
#include "csmix/format.h"
#include "csmix/generator.h"
#include "csmix/metrics.h"
#include "csmix/objectives.h"
#include "csmix/parallel.h"
#include "csmix/subword.h"
#include "csmix/units.h"

namespace csmix {
namespace {

using Json = nlohmann::ordered_json;

// Option values for every subcommand. Each subcommand binds the fields it
// uses; defaults live here.
struct Options {
  int workers = 1;
  std::string manifest;

  std::string src, tgt, src_lang = "en", tgt_lang = "fr";
  std::string out, out_src, out_tgt, report;
  std::vector<std::string> inputs;
  uint64_t seed = 0;

  // clean
  size_t min_len = 2, max_len = 250;
  double ratio_max = 1.5;
  bool apply_ratio = false;
  bool tokenize = false;

  // subword
  int merges = 500;
  std::string model;
  bool remove = false;
  size_t text_fields = 0;

  // aligner
  AlignerOptions aligner;
  std::string reverse_out, trace;
  bool reverse = false;
  std::string fwd, rev, align, heuristic = "gdfa";

  // units
  std::string histogram_out;
  std::string side = "src";

  // generate
  std::string mode = "mlm_fraction";
  double fraction = 0.15;
  size_t short_threshold = 7;
  int max_replacements = 10;
  std::string records;
  std::string force_matrix, force_units;

  // stats
  std::vector<std::string> corpora;
  size_t bin_width = 5;
  std::string out_dir = "reports";
  bool svg = false;

  // bleu
  std::string hyp, ref, copying, ref_side = "matrix", target_lang;
  std::string smoothing = "none", bleu_tokenizer = "none";
  bool lowercase = false;

  // objectives
  std::string kind = "pool_cosine", train, checkpoint;
  size_t steps = 500, dim = 8, batch_size = 20, vocab = 50, batches = 20;
  double lr = 0.5, step = 1e-5, tolerance = 1e-4;
  double weight = -1.0, delta = 0.4, margin = 0.3;
  int negatives = -1;
};

// A validation failure: bad flags, inconsistent inputs. Exit code 2.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void EnsureParent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

void WriteText(const std::string& path, const std::string& text) {
  EnsureParent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void WriteLinesTo(const std::string& path,
                  const std::vector<std::string>& lines) {
  EnsureParent(path);
  WriteLines(path, lines);
}

std::vector<size_t> ParseIndexList(const std::string& text) {
  std::vector<size_t> ids;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const long long v = ParseInt(item);
    if (v < 0) throw ValidationError("negative unit index in --force-units");
    ids.push_back(static_cast<size_t>(v));
  }
  return ids;
}

std::vector<SentencePair> ReadCorpus(const Options& o) {
  return ReadParallel(o.src, o.tgt, o.src_lang, o.tgt_lang);
}

std::vector<AlignmentLinkSet> ReadAlignments(
    const std::string& path, const std::vector<SentencePair>& pairs,
    bool transposed) {
  const auto lines = ReadLines(path);
  if (lines.size() != pairs.size()) {
    throw ValidationError("'" + path + "' has " + std::to_string(lines.size()) +
                          " lines, corpus has " +
                          std::to_string(pairs.size()));
  }
  std::vector<AlignmentLinkSet> out;
  out.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    const size_t s = pairs[i].source.size(), t = pairs[i].target.size();
    out.push_back(transposed ? AlignmentLinkSet::FromPharaoh(lines[i], t, s)
                             : AlignmentLinkSet::FromPharaoh(lines[i], s, t));
  }
  return out;
}

AlignerOptions AlignerFrom(const Options& o) {
  AlignerOptions a = o.aligner;
  a.workers = o.workers;
  a.Validate();
  return a;
}

// ---- subcommands ----

void RunClean(const Options& o, std::ostream& out) {
  CleaningPolicy policy;
  policy.min_len = o.min_len;
  policy.max_len = o.max_len;
  policy.ratio_max = o.ratio_max;
  policy.apply_ratio = o.apply_ratio;
  policy.Validate();
  std::vector<SentencePair> pairs;
  if (o.tokenize) {
    const auto src = ReadLines(o.src);
    const auto tgt = ReadLines(o.tgt);
    if (src.size() != tgt.size()) {
      throw ValidationError("parallel files differ in line count");
    }
    pairs.resize(src.size());
    ParallelFor(src.size(), o.workers, [&](size_t i) {
      pairs[i].source = Tokenize(src[i], o.src_lang);
      pairs[i].target = Tokenize(tgt[i], o.tgt_lang);
    });
  } else {
    pairs = ReadCorpus(o);
  }
  const auto result = CleanCorpus(pairs, policy, o.workers);
  std::vector<std::string> src_lines, tgt_lines;
  for (const auto& p : result.pairs) {
    src_lines.push_back(JoinTokens(p.source.tokens));
    tgt_lines.push_back(JoinTokens(p.target.tokens));
  }
  WriteLinesTo(o.out_src, src_lines);
  WriteLinesTo(o.out_tgt, tgt_lines);
  const std::string line = result.report.ToJsonLine();
  if (!o.report.empty()) WriteText(o.report, line + "\n");
  out << line << '\n';
}

void RunTag(const Options& o, std::ostream& out) {
  const LanguagePair langs{o.src_lang, o.tgt_lang};
  std::vector<std::string> lines;
  for (const auto& pair : ReadCorpus(o)) {
    for (const auto& row : BidirectionalRows(pair, langs)) {
      lines.push_back(FormatRow(row));
    }
  }
  WriteLinesTo(o.out, lines);
  out << Json{{"stage", "tag"}, {"rows", lines.size()}}.dump() << '\n';
}

void RunMix(const Options& o, std::ostream& out) {
  std::vector<std::string> all;
  for (const auto& path : o.inputs) {
    auto lines = ReadLines(path);
    all.insert(all.end(), lines.begin(), lines.end());
  }
  auto mixed = MixCorpora(std::move(all), std::vector<std::string>{}, o.seed);
  WriteLinesTo(o.out, mixed);
  out << Json{{"stage", "mix"}, {"rows", mixed.size()}}.dump() << '\n';
}

void RunBpeLearn(const Options& o, std::ostream& out) {
  std::vector<Sentence> corpus;
  for (const auto& path : o.inputs) {
    for (const auto& line : ReadLines(path)) {
      corpus.push_back({SplitWhitespace(line), ""});
    }
  }
  const BpeModel model = LearnBpe(corpus, o.merges);
  EnsureParent(o.out);
  model.Save(o.out);
  out << Json{{"stage", "bpe-learn"}, {"merges", model.merge_count()}}.dump()
      << '\n';
}

void RunBpeApply(const Options& o, std::ostream& out) {
  const BpeModel model = o.remove ? BpeModel() : BpeModel::Load(o.model);
  const auto lines = ReadLines(o.inputs.at(0));
  std::vector<std::string> result(lines.size());
  ParallelFor(lines.size(), o.workers, [&](size_t i) {
    auto fields = SplitTabs(lines[i]);
    const size_t n = o.text_fields == 0 ? fields.size()
                                        : std::min(o.text_fields, fields.size());
    for (size_t f = 0; f < n; ++f) {
      const Sentence s{SplitWhitespace(fields[f]), ""};
      fields[f] = JoinTokens((o.remove ? RemoveBpe(s) : ApplyBpe(model, s)).tokens);
    }
    std::string joined;
    for (size_t f = 0; f < fields.size(); ++f) {
      if (f > 0) joined.push_back('\t');
      joined += fields[f];
    }
    result[i] = std::move(joined);
  });
  WriteLinesTo(o.out, result);
  out << Json{{"stage", o.remove ? "bpe-remove" : "bpe-apply"},
              {"lines", result.size()}}
             .dump()
      << '\n';
}

void RunAlignTrain(const Options& o, std::ostream& out) {
  const AlignerOptions options = AlignerFrom(o);
  const auto pairs = ReadCorpus(o);
  std::vector<std::string> trace = {"direction,stage,iteration,log_likelihood"};
  auto train = [&](const std::vector<SentencePair>& corpus,
                   const std::string& direction, const std::string& path) {
    EmTrace t;
    const DiagonalModel model = TrainDiagonal(corpus, options, &t);
    EnsureParent(path);
    model.Save(path);
    for (size_t k = 0; k < t.model1.size(); ++k) {
      trace.push_back(direction + ",model1," + std::to_string(k) + "," +
                      FormatDouble(t.model1[k]));
    }
    for (size_t k = 0; k < t.diagonal.size(); ++k) {
      trace.push_back(direction + ",diagonal," + std::to_string(k) + "," +
                      FormatDouble(t.diagonal[k]));
    }
    return t;
  };
  const EmTrace fwd = train(pairs, "forward", o.out);
  Json summary{{"stage", "align-train"}, {"pairs", pairs.size()}};
  if (!fwd.diagonal.empty()) summary["forward_log_likelihood"] = fwd.diagonal.back();
  if (!o.reverse_out.empty()) {
    std::vector<SentencePair> reversed;
    reversed.reserve(pairs.size());
    for (const auto& p : pairs) reversed.push_back(Reversed(p));
    const EmTrace rev = train(reversed, "reverse", o.reverse_out);
    if (!rev.diagonal.empty()) summary["reverse_log_likelihood"] = rev.diagonal.back();
  }
  if (!o.trace.empty()) WriteLinesTo(o.trace, trace);
  out << summary.dump() << '\n';
}

void RunAlignDecode(const Options& o, std::ostream& out) {
  const DiagonalModel model = DiagonalModel::Load(o.model);
  auto pairs = ReadCorpus(o);
  if (o.reverse) {
    for (auto& p : pairs) p = Reversed(p);
  }
  std::vector<std::string> lines(pairs.size());
  ParallelFor(pairs.size(), o.workers, [&](size_t i) {
    lines[i] = ViterbiAlign(model, pairs[i]).ToPharaoh();
  });
  WriteLinesTo(o.out, lines);
  out << Json{{"stage", "align-decode"}, {"lines", lines.size()}}.dump()
      << '\n';
}

void RunSymmetrize(const Options& o, std::ostream& out) {
  const Symmetrization heuristic = ParseSymmetrization(o.heuristic);
  const auto pairs = ReadCorpus(o);
  const auto fwd = ReadAlignments(o.fwd, pairs, false);
  const auto rev = ReadAlignments(o.rev, pairs, true);
  std::vector<std::string> lines(pairs.size());
  size_t links = 0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto sym = Symmetrize(fwd[i], rev[i], heuristic);
    links += sym.links.size();
    lines[i] = sym.ToPharaoh();
  }
  WriteLinesTo(o.out, lines);
  out << Json{{"stage", "symmetrize"}, {"lines", lines.size()}, {"links", links}}
             .dump()
      << '\n';
}

void RunUnits(const Options& o, std::ostream& out) {
  if (o.side != "src" && o.side != "tgt") {
    throw ValidationError("--side must be src or tgt");
  }
  const auto pairs = ReadCorpus(o);
  const auto links = ReadAlignments(o.align, pairs, false);
  std::vector<std::vector<MinimalUnit>> units(pairs.size());
  ParallelFor(pairs.size(), o.workers,
              [&](size_t i) { units[i] = ExtractUnits(links[i]); });
  std::vector<std::string> lines;
  std::vector<size_t> spans;
  size_t total = 0;
  for (const auto& u : units) {
    lines.push_back(FormatUnits(u));
    total += u.size();
    for (const auto& [len, n] : UnitSpanHistogram(
             u, o.side == "src" ? UnitSide::kSource : UnitSide::kTarget)) {
      spans.insert(spans.end(), n, len);
    }
  }
  WriteLinesTo(o.out, lines);
  if (!o.histogram_out.empty()) {
    Histogram h = IntegerHistogram(spans, 1);
    h.title = "Unit span (" + o.side + ")";
    WriteText(o.histogram_out, RenderCsv(h));
  }
  out << Json{{"stage", "units"}, {"lines", lines.size()}, {"units", total}}
             .dump()
      << '\n';
}

void RunGenerate(const Options& o, std::ostream& out) {
  ReplacementPolicy policy;
  policy.mode = ParseReplacementMode(o.mode);
  policy.fraction = o.fraction;
  policy.short_threshold = o.short_threshold;
  policy.max_replacements = o.max_replacements;
  policy.seed = o.seed;
  policy.Validate();
  GenerationOverrides overrides;
  if (!o.force_matrix.empty()) {
    if (o.force_matrix != o.src_lang && o.force_matrix != o.tgt_lang) {
      throw ValidationError("--force-matrix must be " + o.src_lang + " or " +
                            o.tgt_lang);
    }
    overrides.matrix_lang = o.force_matrix;
  }
  if (!o.force_units.empty()) overrides.unit_ids = ParseIndexList(o.force_units);

  const auto pairs = ReadCorpus(o);
  const auto links = ReadAlignments(o.align, pairs, false);
  const auto result = GenerateCsw(pairs, links, policy, overrides, o.workers);
  std::vector<std::string> lines;
  lines.reserve(result.rows.size());
  for (const auto& row : result.rows) lines.push_back(FormatCswRow(row));
  WriteLinesTo(o.out, lines);
  if (!o.records.empty()) {
    std::vector<std::string> recs;
    recs.reserve(result.records.size());
    for (const auto& rec : result.records) recs.push_back(RecordToJson(rec));
    WriteLinesTo(o.records, recs);
  }
  const std::string report = result.report.ToJson(policy);
  if (!o.report.empty()) WriteText(o.report, report + "\n");
  out << Json{{"stage", "generate"},
              {"records", result.records.size()},
              {"rows", result.rows.size()}}
             .dump()
      << '\n';
}

void RunStats(const Options& o, std::ostream& out) {
  std::map<std::string, Histogram> histograms;
  if (!o.corpora.empty()) {
    std::vector<Sentence> corpus;
    for (const auto& path : o.corpora) {
      for (const auto& line : ReadLines(path)) {
        corpus.push_back({SplitWhitespace(line), ""});
      }
    }
    histograms["length"] = LengthHistogram(corpus, o.bin_width);
  }
  if (!o.records.empty()) {
    std::vector<CswRecord> records;
    for (const auto& line : ReadLines(o.records)) {
      if (!line.empty()) records.push_back(RecordFromJson(line));
    }
    histograms["fraction"] = FractionHistogram(records);
    histograms["span"] = SpanHistogram(records);
  }
  if (histograms.empty()) {
    throw ValidationError("stats needs --corpus and/or --records");
  }
  WriteReports(o.out_dir, histograms, o.svg);
  Json summary{{"stage", "stats"}};
  for (const auto& [name, h] : histograms) summary[name] = h.total();
  out << summary.dump() << '\n';
}

void RunBleu(const Options& o, std::ostream& out) {
  BleuConfig config;
  config.smoothing = ParseBleuSmoothing(o.smoothing);
  config.tokenizer = ParseBleuTokenizer(o.bleu_tokenizer);
  config.case_sensitive = !o.lowercase;
  BleuResult result;
  if (!o.copying.empty()) {
    std::vector<CswRow> rows;
    for (const auto& line : ReadLines(o.copying)) {
      if (!line.empty()) rows.push_back(ParseCswRow(line));
    }
    std::optional<std::string> target;
    if (!o.target_lang.empty()) target = o.target_lang;
    result = CopyingBaseline(rows, ParseRefSide(o.ref_side), target, config);
  } else {
    if (o.hyp.empty() || o.ref.empty()) {
      throw ValidationError("bleu needs --hyp and --ref, or --copying");
    }
    result = CorpusBleu(ReadLines(o.hyp), ReadLines(o.ref), config);
  }
  WriteText(o.out, result.ToJson() + "\n");
  out << Json{{"stage", "bleu"}, {"score", result.score}}.dump() << '\n';
}

ObjectiveConfig ObjectiveFrom(const Options& o) {
  ObjectiveConfig config = ObjectiveConfig::ForKind(ParseObjectiveKind(o.kind));
  if (o.weight >= 0.0) config.weight = o.weight;
  config.delta = o.delta;
  config.margin = o.margin;
  config.negatives = o.negatives;
  config.Validate();
  return config;
}

void RunObjTrain(const Options& o, std::ostream& out) {
  const ObjectiveConfig config = ObjectiveFrom(o);
  if (o.batch_size == 0) throw ValidationError("--batch-size must be positive");
  std::vector<Example> examples;
  std::vector<Sentence> sentences;
  for (const auto& line : ReadLines(o.train)) {
    if (line.empty()) continue;
    const SentencePair pair = ParseRow(line);
    if (pair.source.empty() || pair.target.empty()) continue;
    examples.push_back({pair.source, pair.target, std::nullopt});
    sentences.push_back(pair.source);
    sentences.push_back(pair.target);
  }
  if (examples.empty()) throw ValidationError("no training rows in " + o.train);
  std::vector<Batch> batches;
  for (size_t i = 0; i < examples.size(); i += o.batch_size) {
    Batch b;
    const size_t end = std::min(examples.size(), i + o.batch_size);
    b.items.assign(examples.begin() + i, examples.begin() + end);
    batches.push_back(std::move(b));
  }
  ToyEncoder encoder(CollectWords(sentences), o.dim, config.pooling, o.seed);
  const auto trace = TrainEncoder(encoder, batches, config, o.steps, o.lr);
  WriteText(o.out, FormatTraceCsv(trace));
  if (!o.checkpoint.empty()) {
    EnsureParent(o.checkpoint);
    encoder.Save(o.checkpoint);
  }
  double pair_cos = 0.0;
  for (const auto& ex : examples) {
    pair_cos += Cosine(encoder.Encode(ex.x, config.pooling),
                       encoder.Encode(ex.y, config.pooling));
  }
  Json summary{{"stage", "obj-train"},
               {"kind", o.kind},
               {"steps", trace.size()},
               {"mean_pair_cosine", pair_cos / static_cast<double>(examples.size())}};
  if (!trace.empty()) summary["final_loss"] = trace.back().loss;
  out << summary.dump() << '\n';
}

bool RunGradcheck(const Options& o, std::ostream& out) {
  const ObjectiveConfig config = ObjectiveFrom(o);
  if (o.vocab == 0 || o.dim == 0) throw ValidationError("--vocab and --dim must be positive");
  const auto words = SyntheticWords(o.vocab);
  double worst = 0.0;
  size_t checked = 0, skipped = 0;
  for (size_t b = 0; b < o.batches; ++b) {
    Rng rng(DeriveSeed(o.seed, 0x6772616463, b));
    const ToyEncoder encoder(words, o.dim, config.pooling, rng.Next());
    const Batch batch = RandomBatch(words, o.batch_size, 1, 6, rng);
    const auto r = Gradcheck(encoder, batch, config, o.step);
    worst = std::max(worst, r.max_rel_err);
    checked += r.checked;
    skipped += r.skipped;
  }
  const bool pass = worst < o.tolerance;
  Json report{{"kind", o.kind},          {"batches", o.batches},
              {"max_rel_err", worst},    {"tolerance", o.tolerance},
              {"checked", checked},      {"skipped", skipped},
              {"pass", pass}};
  WriteText(o.out, report.dump(2) + "\n");
  out << report.dump() << '\n';
  return pass;
}

// ---- manifest ----

std::string OptionValue(const CLI::Option* opt) {
  if (opt->count() == 0) return opt->get_default_str();
  std::string joined;
  for (const auto& r : opt->results()) {
    if (!joined.empty()) joined.push_back(' ');
    joined += r;
  }
  return joined;
}

const std::set<std::string> kUnrecorded = {"help", "workers", "manifest",
                                           "config"};

struct Subcommand {
  CLI::App* app = nullptr;
  std::vector<std::string> input_options;
  std::vector<std::string> output_options;
  std::set<std::string> flags;
  std::function<int(Options&, std::ostream&)> run;
  // Each subcommand binds its own copy, so a config section for one
  // subcommand cannot leak into another.
  std::unique_ptr<Options> opts = std::make_unique<Options>();
};

Json BuildManifest(const Subcommand& sub, const Options& o) {
  Json config = Json::object();
  Json args = Json::array({sub.app->get_name()});
  for (const CLI::Option* opt : sub.app->get_options()) {
    const std::string name = opt->get_single_name();
    if (kUnrecorded.count(name)) continue;
    config[name] = OptionValue(opt);
    if (opt->count() == 0) continue;
    if (sub.flags.count(name)) {
      args.push_back("--" + name);
    } else {
      for (const auto& r : opt->results()) {
        args.push_back("--" + name);
        args.push_back(r);
      }
    }
  }
  Json inputs = Json::array();
  for (const auto& name : sub.input_options) {
    const CLI::Option* opt = sub.app->get_option(name);
    for (const auto& path : opt->results()) {
      inputs.push_back({{"option", name.substr(2)},
                        {"path", path},
                        {"sha256", Sha256File(path)}});
    }
  }
  Json manifest;
  manifest["tool"] = "csmix";
  manifest["version"] = kToolVersion;
  manifest["subcommand"] = sub.app->get_name();
  manifest["seed"] = config.contains("seed") ? Json(o.seed) : Json(nullptr);
  manifest["inputs"] = inputs;
  manifest["config"] = config;
  manifest["args"] = args;
  return manifest;
}

std::string ManifestPath(const Subcommand& sub, const Options& o) {
  if (!o.manifest.empty()) return o.manifest;
  for (const auto& name : sub.output_options) {
    const CLI::Option* opt = sub.app->get_option(name);
    const std::string value = OptionValue(opt);
    if (value.empty()) continue;
    if (name == "--out-dir") {
      return (std::filesystem::path(value) / "manifest.json").string();
    }
    return value + ".manifest.json";
  }
  return sub.app->get_name() + ".manifest.json";
}

void PrintError(std::ostream& err, const std::string& type,
                const std::string& message) {
  err << Json{{"error", {{"type", type}, {"message", message}}}}.dump() << '\n';
}

int Replay(const std::string& path, int workers, std::ostream& out,
           std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read manifest '" + path + "'");
  const auto manifest = nlohmann::json::parse(in);
  if (manifest.value("tool", "") != "csmix") {
    throw ValidationError("'" + path + "' is not a csmix manifest");
  }
  for (const auto& input : manifest.at("inputs")) {
    const std::string file = input.at("path");
    if (Sha256File(file) != input.at("sha256").get<std::string>()) {
      throw std::runtime_error("input '" + file +
                               "' changed since the manifest was written");
    }
  }
  std::vector<std::string> args =
      manifest.at("args").get<std::vector<std::string>>();
  args.push_back("--workers");
  args.push_back(std::to_string(workers));
  return RunCli(args, out, err);
}

}  // namespace

std::string Sha256File(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("SHA-256 unavailable");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) {
      EVP_DigestUpdate(ctx, buf.data(), static_cast<size_t>(in.gcount()));
    }
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Synthetic code-switched parallel data toolkit", "csmix"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "INI file; [subcommand] sections set flags");
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Options global;
  app.add_option("--workers", global.workers, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  app.add_option("--manifest", global.manifest, "Manifest path (default: next to the output)");

  std::vector<Subcommand> subs;
  auto add = [&](const std::string& name, const std::string& help) -> Subcommand& {
    subs.push_back({});
    subs.back().app = app.add_subcommand(name, help);
    return subs.back();
  };
  auto input = [](Subcommand& s, const std::string& flag, std::string& target,
                  const std::string& help, bool required = true) {
    auto* opt = s.app->add_option(flag, target, help)->check(CLI::ExistingFile);
    if (required) opt->required();
    s.input_options.push_back(flag);
  };
  auto inputs = [](Subcommand& s, const std::string& flag,
                   std::vector<std::string>& target, const std::string& help) {
    s.app->add_option(flag, target, help)->required()->check(CLI::ExistingFile);
    s.input_options.push_back(flag);
  };
  auto output = [](Subcommand& s, const std::string& flag, std::string& target,
                   const std::string& help, bool required = true) {
    auto* opt = s.app->add_option(flag, target, help);
    if (required) opt->required();
    s.output_options.push_back(flag);
  };
  auto flag = [](Subcommand& s, const std::string& name, bool& target,
                 const std::string& help) {
    s.app->add_flag(name, target, help);
    s.flags.insert(name.substr(2));
  };
  auto corpus = [&](Subcommand& s) {
    Options& o = *s.opts;
    input(s, "--src", o.src, "Source-side tokenized text, one sentence per line");
    input(s, "--tgt", o.tgt, "Target-side tokenized text, parallel to --src");
    s.app->add_option("--src-lang", o.src_lang, "Source language code");
    s.app->add_option("--tgt-lang", o.tgt_lang, "Target language code");
  };
  auto aligner = [&](Subcommand& s) {
    Options& o = *s.opts;
    auto* a = s.app;
    a->add_option("--model1-iterations", o.aligner.model1_iterations, "Model 1 EM iterations")->check(CLI::NonNegativeNumber);
    a->add_option("--diagonal-iterations", o.aligner.diagonal_iterations,
                   "Diagonal-prior EM iterations")->check(CLI::NonNegativeNumber);
    a->add_option("--tension", o.aligner.tension, "Strength of the diagonal prior");
    a->add_option("--null-prob", o.aligner.null_prob, "Probability of aligning to NULL");
    a->add_option("--prob-floor", o.aligner.prob_floor, "Smallest translation probability");
  };
  auto objective = [&](Subcommand& s) {
    Options& o = *s.opts;
    auto* a = s.app;
    a->add_option("--kind", o.kind, "pool_cosine|neg_margin|ranking|ams|sentence_align");
    a->add_option("--weight", o.weight, "Loss weight (default: 10 for pool_cosine, else 1)");
    a->add_option("--delta", o.delta, "Margin of neg_margin");
    a->add_option("--margin", o.margin, "Additive margin of ams");
    a->add_option("--negatives", o.negatives, "In-batch negatives (-1: batch size - 1)");
    a->add_option("--dim", o.dim, "Embedding width");
    a->add_option("--batch-size", o.batch_size, "Pairs per batch");
  };

  {
    auto& s = add("clean", "Tokenize (optionally) and length-filter a parallel corpus");
    Options& o = *s.opts;
    corpus(s);
    output(s, "--out-src", o.out_src, "Cleaned source file");
    output(s, "--out-tgt", o.out_tgt, "Cleaned target file");
    output(s, "--report", o.report, "Report JSON line", false);
    s.app->add_option("--min-len", o.min_len, "Drop sentences shorter than this");
    s.app->add_option("--max-len", o.max_len, "Drop sentences longer than this");
    s.app->add_option("--ratio-max", o.ratio_max, "Largest length ratio with --apply-ratio");
    flag(s, "--apply-ratio", o.apply_ratio, "Also enforce the length ratio");
    flag(s, "--tokenize", o.tokenize, "Inputs are raw text; tokenize first");
    s.run = [](Options& o, std::ostream& os) { RunClean(o, os); return kExitOk; };
  }
  {
    auto& s = add("tag", "Emit both tagged directions of a parallel corpus as TSV");
    Options& o = *s.opts;
    corpus(s);
    output(s, "--out", o.out, "Output TSV");
    s.run = [](Options& o, std::ostream& os) { RunTag(o, os); return kExitOk; };
  }
  {
    auto& s = add("mix", "Concatenate corpora and shuffle with a seed");
    Options& o = *s.opts;
    inputs(s, "--input", o.inputs, "Corpus files (repeatable)");
    output(s, "--out", o.out, "Mixed output");
    s.app->add_option("--seed", o.seed, "Random seed")->required();
    s.run = [](Options& o, std::ostream& os) { RunMix(o, os); return kExitOk; };
  }
  {
    auto& s = add("bpe-learn", "Learn a shared BPE model");
    Options& o = *s.opts;
    inputs(s, "--input", o.inputs, "Tokenized text or TSV (repeatable)");
    output(s, "--out", o.out, "Model file");
    s.app->add_option("--merges", o.merges, "Number of merges")->check(CLI::PositiveNumber);
    s.run = [](Options& o, std::ostream& os) { RunBpeLearn(o, os); return kExitOk; };
  }
  {
    auto& s = add("bpe-apply", "Apply (or remove) BPE segmentation");
    Options& o = *s.opts;
    inputs(s, "--input", o.inputs, "Tokenized text or TSV");
    input(s, "--model", o.model, "BPE model file", false);
    output(s, "--out", o.out, "Output file");
    flag(s, "--remove", o.remove, "Join continuation-marked pieces instead");
    s.app->add_option("--text-fields", o.text_fields,
                      "Leading TSV fields to segment (0: all)");
    s.run = [](Options& o, std::ostream& os) {
      if (!o.remove && o.model.empty()) throw ValidationError("--model is required");
      RunBpeApply(o, os);
      return kExitOk;
    };
  }
  {
    auto& s = add("align-train", "Train the diagonal-prior alignment model");
    Options& o = *s.opts;
    corpus(s);
    aligner(s);
    output(s, "--out", o.out, "Forward model (TSV)");
    output(s, "--reverse-out", o.reverse_out, "Also train target-to-source", false);
    output(s, "--trace", o.trace, "Log-likelihood trace CSV", false);
    s.run = [](Options& o, std::ostream& os) { RunAlignTrain(o, os); return kExitOk; };
  }
  {
    auto& s = add("align-decode", "Viterbi-align a corpus to Pharaoh format");
    Options& o = *s.opts;
    corpus(s);
    input(s, "--model", o.model, "Model from align-train");
    output(s, "--out", o.out, "Pharaoh output");
    flag(s, "--reverse", o.reverse, "Decode target-to-source with a reverse model");
    s.run = [](Options& o, std::ostream& os) { RunAlignDecode(o, os); return kExitOk; };
  }
  {
    auto& s = add("symmetrize", "Combine forward and reverse alignments");
    Options& o = *s.opts;
    corpus(s);
    input(s, "--fwd", o.fwd, "Source-to-target Pharaoh file");
    input(s, "--rev", o.rev, "Target-to-source Pharaoh file, in its own orientation");
    output(s, "--out", o.out, "Output Pharaoh file");
    s.app->add_option("--heuristic", o.heuristic, "intersection|union|gdfa");
    s.run = [](Options& o, std::ostream& os) { RunSymmetrize(o, os); return kExitOk; };
  }
  {
    auto& s = add("units", "Extract minimal aligned units");
    Options& o = *s.opts;
    corpus(s);
    input(s, "--align", o.align, "Source-to-target Pharaoh file");
    output(s, "--out", o.out, "Unit dump");
    output(s, "--histogram-out", o.histogram_out, "Span histogram CSV", false);
    s.app->add_option("--side", o.side, "Histogram side: src|tgt");
    s.run = [](Options& o, std::ostream& os) { RunUnits(o, os); return kExitOk; };
  }
  {
    auto& s = add("generate", "Generate code-switched rows");
    Options& o = *s.opts;
    corpus(s);
    input(s, "--align", o.align, "Source-to-target Pharaoh file");
    output(s, "--out", o.out, "Output TSV");
    output(s, "--report", o.report, "Run report JSON", false);
    output(s, "--records", o.records, "Per-record JSON lines", false);
    s.app->add_option("--mode", o.mode, "mlm_fraction|exponential");
    s.app->add_option("--fraction", o.fraction, "Share of matrix tokens to replace");
    s.app->add_option("--short-threshold", o.short_threshold,
                      "Shorter matrix sentences get one replacement");
    s.app->add_option("--max-replacements", o.max_replacements,
                      "Largest count in exponential mode");
    s.app->add_option("--seed", o.seed, "Random seed")->required();
    s.app->add_option("--force-matrix", o.force_matrix, "Use this matrix language on every line");
    s.app->add_option("--force-units", o.force_units, "Comma-separated unit indices to replace");
    s.run = [](Options& o, std::ostream& os) { RunGenerate(o, os); return kExitOk; };
  }
  {
    auto& s = add("stats", "Length, fraction and span histograms");
    Options& o = *s.opts;
    s.app->add_option("--corpus", o.corpora, "Tokenized text files")->check(CLI::ExistingFile);
    s.input_options.push_back("--corpus");
    input(s, "--records", o.records, "Records from generate --records", false);
    output(s, "--out-dir", o.out_dir, "Report directory", false);
    s.app->add_option("--bin-width", o.bin_width)->check(CLI::PositiveNumber);
    flag(s, "--svg", o.svg, "Also render SVG charts");
    s.run = [](Options& o, std::ostream& os) { RunStats(o, os); return kExitOk; };
  }
  {
    auto& s = add("bleu", "Corpus BLEU, or the copying baseline");
    Options& o = *s.opts;
    input(s, "--hyp", o.hyp, "Hypotheses, one per line", false);
    input(s, "--ref", o.ref, "References, one per line", false);
    input(s, "--copying", o.copying, "Generated TSV for the copying baseline", false);
    output(s, "--out", o.out, "Result JSON");
    s.app->add_option("--ref-side", o.ref_side, "matrix|embedded");
    s.app->add_option("--target-lang", o.target_lang, "Only rows into this language");
    s.app->add_option("--smoothing", o.smoothing, "none|exp");
    s.app->add_option("--tokenize", o.bleu_tokenizer, "none|13a");
    flag(s, "--lowercase", o.lowercase, "Case-insensitive scoring");
    s.run = [](Options& o, std::ostream& os) { RunBleu(o, os); return kExitOk; };
  }
  {
    auto& s = add("obj-train", "Train the toy encoder with an alignment objective");
    Options& o = *s.opts;
    input(s, "--train", o.train, "TSV rows: [tag] source \\t target");
    output(s, "--out", o.out, "Trace CSV (step,loss,grad_norm)");
    output(s, "--checkpoint", o.checkpoint, "Encoder checkpoint", false);
    objective(s);
    s.app->add_option("--steps", o.steps, "Gradient steps");
    s.app->add_option("--lr", o.lr, "Learning rate");
    s.app->add_option("--seed", o.seed, "Random seed")->required();
    s.run = [](Options& o, std::ostream& os) { RunObjTrain(o, os); return kExitOk; };
  }
  {
    auto& s = add("gradcheck", "Finite-difference check of an objective");
    Options& o = *s.opts;
    objective(s);
    output(s, "--out", o.out, "Result JSON", false);
    s.app->add_option("--vocab", o.vocab, "Synthetic vocabulary size");
    s.app->add_option("--batches", o.batches, "Random batches to check");
    s.app->add_option("--seed", o.seed, "Random seed");
    s.app->add_option("--step", o.step, "Finite-difference step")->check(CLI::PositiveNumber);
    s.app->add_option("--tolerance", o.tolerance, "Largest accepted relative error");
    s.run = [](Options& o, std::ostream& os) {
      if (o.out.empty()) o.out = "gradcheck.json";
      return RunGradcheck(o, os) ? kExitOk : kExitRuntime;
    };
  }
  std::string replay_path;
  CLI::App* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", replay_path, "Manifest JSON")->required();

  // Batch size defaults differ between training and checking.
  for (auto& s : subs) {
    if (s.app->get_name() == "gradcheck") {
      s.app->get_option("--batch-size")->default_val(8);
    }
  }

  std::vector<const char*> argv = {"csmix"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    PrintError(err, "usage", e.what());
    err << app.help();
    return kExitUsage;
  }

  try {
    if (replay->parsed()) return Replay(replay_path, global.workers, out, err);
    for (auto& s : subs) {
      if (!s.app->parsed()) continue;
      Options& o = *s.opts;
      o.workers = global.workers;
      o.manifest = global.manifest;
      const int code = s.run(o, out);
      WriteText(ManifestPath(s, o), BuildManifest(s, o).dump(2) + "\n");
      return code;
    }
  } catch (const std::invalid_argument& e) {
    PrintError(err, "validation", e.what());
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    PrintError(err, "validation", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    PrintError(err, "runtime", e.what());
    return kExitRuntime;
  }
  PrintError(err, "usage", "no subcommand");
  return kExitUsage;
}

}  // namespace csmix
