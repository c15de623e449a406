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

#include "csmix/objectives.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "csmix/format.h"
#include "csmix/rng.h"

namespace csmix {
namespace {

struct Pooled {
  std::vector<double> v;
  std::vector<int> ids;
  // Max pooling: position in `ids` that wins each dimension.
  std::vector<size_t> winner;
};

Pooled Pool(const std::vector<double>& params, size_t d,
            const std::vector<int>& ids, Pooling pooling) {
  if (ids.empty()) throw std::invalid_argument("cannot encode an empty sentence");
  Pooled p;
  p.ids = ids;
  p.v.assign(d, 0.0);
  if (pooling == Pooling::kMean) {
    for (int id : ids) {
      const double* row = &params[static_cast<size_t>(id) * d];
      for (size_t k = 0; k < d; ++k) p.v[k] += row[k];
    }
    const double n = static_cast<double>(ids.size());
    for (double& x : p.v) x /= n;
  } else {
    p.winner.assign(d, 0);
    for (size_t k = 0; k < d; ++k) {
      double best = params[static_cast<size_t>(ids[0]) * d + k];
      // First maximum wins ties.
      for (size_t t = 1; t < ids.size(); ++t) {
        const double x = params[static_cast<size_t>(ids[t]) * d + k];
        if (x > best) {
          best = x;
          p.winner[k] = t;
        }
      }
      p.v[k] = best;
    }
  }
  return p;
}

void Backprop(const Pooled& p, const std::vector<double>& dv, size_t d,
              Pooling pooling, std::vector<double>& grad) {
  if (pooling == Pooling::kMean) {
    const double n = static_cast<double>(p.ids.size());
    for (int id : p.ids) {
      double* row = &grad[static_cast<size_t>(id) * d];
      for (size_t k = 0; k < d; ++k) row[k] += dv[k] / n;
    }
  } else {
    for (size_t k = 0; k < d; ++k) {
      grad[static_cast<size_t>(p.ids[p.winner[k]]) * d + k] += dv[k];
    }
  }
}

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double Norm(const std::vector<double>& a) { return std::sqrt(Dot(a, a)); }

// d cos(a, b) / d a
std::vector<double> CosineGrad(const std::vector<double>& a,
                               const std::vector<double>& b, double na,
                               double nb, double cos) {
  std::vector<double> g(a.size());
  for (size_t k = 0; k < a.size(); ++k) {
    g[k] = b[k] / (na * nb) - cos * a[k] / (na * na);
  }
  return g;
}

void Axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
}

struct Evaluation {
  double loss = 0.0;
  std::vector<double> gradient;
  size_t items = 0;
  size_t skipped = 0;
  std::vector<size_t> touched;
  // Everything that decides which smooth piece the loss is on.
  std::vector<long> signature;
};

class Evaluator {
 public:
  Evaluator(const ToyEncoder& enc, const ObjectiveConfig& config,
            bool want_grad)
      : enc_(enc), config_(config), want_grad_(want_grad) {}

  Evaluation Run(const Batch& batch) {
    config_.Validate();
    out_.gradient.assign(want_grad_ ? enc_.size() : 0, 0.0);
    const size_t n = batch.items.size();
    if (n > 0) {
      std::vector<Pooled> xs, ys;
      for (const auto& ex : batch.items) {
        xs.push_back(Encode(ex.x));
        ys.push_back(Encode(ex.y));
      }
      std::vector<std::vector<double>> dxs(n), dys(n);
      for (size_t i = 0; i < n; ++i) {
        dxs[i].assign(enc_.dim(), 0.0);
        dys[i].assign(enc_.dim(), 0.0);
      }
      switch (config_.kind) {
        case ObjectiveKind::kPoolCosine:
          PoolCosine(xs, ys, dxs, dys);
          break;
        case ObjectiveKind::kNegMargin:
          NegMargin(batch, xs, ys, dxs, dys);
          break;
        case ObjectiveKind::kRanking:
        case ObjectiveKind::kAms:
        case ObjectiveKind::kSentenceAlign:
          Softmax(batch, xs, ys, dxs, dys);
          break;
      }
      if (want_grad_) {
        for (size_t i = 0; i < n; ++i) {
          Backprop(xs[i], dxs[i], enc_.dim(), config_.pooling, out_.gradient);
          Backprop(ys[i], dys[i], enc_.dim(), config_.pooling, out_.gradient);
        }
      }
    }
    Finish();
    return std::move(out_);
  }

 private:
  Pooled Encode(const Sentence& s) {
    Pooled p = Pool(enc_.params(), enc_.dim(), enc_.Ids(s), config_.pooling);
    for (int id : p.ids) touched_ids_.insert(id);
    if (config_.pooling == Pooling::kMax) {
      for (size_t k = 0; k < p.winner.size(); ++k) {
        out_.signature.push_back(p.ids[p.winner[k]]);
      }
    }
    return p;
  }

  void PoolCosine(const std::vector<Pooled>& xs, const std::vector<Pooled>& ys,
                  std::vector<std::vector<double>>& dxs,
                  std::vector<std::vector<double>>& dys) {
    for (size_t i = 0; i < xs.size(); ++i) {
      const double nu = Norm(xs[i].v), nv = Norm(ys[i].v);
      const bool skip = nu == 0.0 || nv == 0.0;
      out_.signature.push_back(skip);
      if (skip) {
        ++out_.skipped;
        continue;
      }
      const double c = Dot(xs[i].v, ys[i].v) / (nu * nv);
      out_.loss -= c;
      ++out_.items;
      if (want_grad_) {
        Axpy(-1.0, CosineGrad(xs[i].v, ys[i].v, nu, nv, c), dxs[i]);
        Axpy(-1.0, CosineGrad(ys[i].v, xs[i].v, nv, nu, c), dys[i]);
      }
    }
  }

  void NegMargin(const Batch& batch, const std::vector<Pooled>& xs,
                 const std::vector<Pooled>& ys,
                 std::vector<std::vector<double>>& dxs,
                 std::vector<std::vector<double>>& dys) {
    const size_t n = xs.size();
    for (size_t i = 0; i < n; ++i) {
      const auto& ex = batch.items[i];
      Pooled explicit_neg;
      const Pooled* neg = &ys[(i + 1) % n];
      if (ex.y_neg) {
        explicit_neg = Encode(*ex.y_neg);
        neg = &explicit_neg;
      }
      const auto& u = xs[i].v;
      const auto& v = ys[i].v;
      const auto& w = neg->v;
      const double nu = Norm(u), nv = Norm(v), nw = Norm(w);
      const bool skip = nu == 0.0 || nv == 0.0 || nw == 0.0;
      if (skip) {
        out_.signature.push_back(-1);
        ++out_.skipped;
        continue;
      }
      const double c1 = Dot(u, v) / (nu * nv);
      const double c2 = Dot(u, w) / (nu * nw);
      const double h = config_.delta - c1 + c2;
      ++out_.items;
      out_.signature.push_back(h > 0.0);
      if (h <= 0.0) continue;
      out_.loss += h;
      if (!want_grad_) continue;
      Axpy(-1.0, CosineGrad(u, v, nu, nv, c1), dxs[i]);
      Axpy(1.0, CosineGrad(u, w, nu, nw, c2), dxs[i]);
      Axpy(-1.0, CosineGrad(v, u, nv, nu, c1), dys[i]);
      const auto dw = CosineGrad(w, u, nw, nu, c2);
      if (ex.y_neg) {
        Backprop(*neg, dw, enc_.dim(), config_.pooling, out_.gradient);
      } else {
        Axpy(1.0, dw, dys[(i + 1) % n]);
      }
    }
  }

  // Ranking, additive-margin and sentence-alignment losses share one shape:
  // -log softmax of the positive logit over a candidate set.
  void Softmax(const Batch& batch, const std::vector<Pooled>& xs,
               const std::vector<Pooled>& ys,
               std::vector<std::vector<double>>& dxs,
               std::vector<std::vector<double>>& dys) {
    const size_t n = xs.size();
    std::vector<Pooled> extras;
    size_t k = n - 1;
    if (config_.kind == ObjectiveKind::kSentenceAlign) {
      for (const auto& s : batch.extra_candidates) extras.push_back(Encode(s));
    } else if (config_.negatives >= 0) {
      k = std::min(k, static_cast<size_t>(config_.negatives));
    }
    const double m =
        config_.kind == ObjectiveKind::kAms ? config_.margin : 0.0;
    std::vector<std::vector<double>> dextras(
        extras.size(), std::vector<double>(enc_.dim(), 0.0));

    for (size_t i = 0; i < n; ++i) {
      // Candidates: the positive first, then in-batch negatives, then extras.
      std::vector<const Pooled*> cand;
      std::vector<std::vector<double>*> dcand;
      cand.push_back(&ys[i]);
      dcand.push_back(&dys[i]);
      for (size_t j = 1; j <= k; ++j) {
        cand.push_back(&ys[(i + j) % n]);
        dcand.push_back(&dys[(i + j) % n]);
      }
      for (size_t e = 0; e < extras.size(); ++e) {
        cand.push_back(&extras[e]);
        dcand.push_back(&dextras[e]);
      }
      std::vector<double> s(cand.size());
      for (size_t c = 0; c < cand.size(); ++c) s[c] = Dot(xs[i].v, cand[c]->v);
      s[0] -= m;
      const double top = *std::max_element(s.begin(), s.end());
      double z = 0.0;
      for (double x : s) z += std::exp(x - top);
      const double lse = top + std::log(z);
      out_.loss += lse - s[0];
      ++out_.items;
      if (!want_grad_) continue;
      for (size_t c = 0; c < cand.size(); ++c) {
        const double g = std::exp(s[c] - lse) - (c == 0 ? 1.0 : 0.0);
        Axpy(g, cand[c]->v, dxs[i]);
        Axpy(g, xs[i].v, *dcand[c]);
      }
    }
    if (want_grad_) {
      for (size_t e = 0; e < extras.size(); ++e) {
        Backprop(extras[e], dextras[e], enc_.dim(), config_.pooling,
                 out_.gradient);
      }
    }
  }

  void Finish() {
    double scale = 1.0;
    if (config_.reduction == Reduction::kMean && out_.items > 0) {
      scale = 1.0 / static_cast<double>(out_.items);
    }
    // Reduce first, weight last, so weighting is an exact scalar multiple.
    out_.loss = config_.weight * (out_.loss * scale);
    for (double& g : out_.gradient) g = config_.weight * (g * scale);
    for (int id : touched_ids_) {
      for (size_t k = 0; k < enc_.dim(); ++k) {
        out_.touched.push_back(static_cast<size_t>(id) * enc_.dim() + k);
      }
    }
  }

  const ToyEncoder& enc_;
  ObjectiveConfig config_;
  bool want_grad_;
  Evaluation out_;
  std::set<int> touched_ids_;
};

std::map<std::string, std::string> HeaderFields(const std::string& line) {
  std::map<std::string, std::string> fields;
  for (const auto& item : SplitWhitespace(line)) {
    const auto eq = item.find('=');
    if (eq != std::string::npos) fields[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return fields;
}

}  // namespace

Pooling ParsePooling(const std::string& name) {
  if (name == "max") return Pooling::kMax;
  if (name == "mean") return Pooling::kMean;
  throw std::invalid_argument("unknown pooling '" + name + "'");
}

std::string PoolingName(Pooling pooling) {
  return pooling == Pooling::kMax ? "max" : "mean";
}

ToyEncoder::ToyEncoder(const std::vector<std::string>& words, size_t dim,
                       Pooling pooling, uint64_t seed, double init_scale)
    : dim_(dim), pooling_(pooling) {
  if (dim == 0) throw std::invalid_argument("embedding width must be positive");
  vocab_.Intern(kUnknown);
  for (const auto& w : words) vocab_.Intern(w);
  params_.resize(vocab_.size() * dim_);
  Rng rng(seed);
  for (double& p : params_) p = init_scale * rng.Normal();
}

int ToyEncoder::Id(const std::string& word) const {
  const auto id = vocab_.Find(word);
  return id ? *id : 0;
}

std::vector<int> ToyEncoder::Ids(const Sentence& s) const {
  std::vector<int> ids;
  ids.reserve(s.size());
  for (const auto& t : s.tokens) ids.push_back(Id(t));
  return ids;
}

std::vector<double> ToyEncoder::Encode(const Sentence& s) const {
  return Encode(s, pooling_);
}

std::vector<double> ToyEncoder::Encode(const Sentence& s,
                                       Pooling pooling) const {
  return Pool(params_, dim_, Ids(s), pooling).v;
}

void ToyEncoder::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "#csmix-encoder version=1 vocab=" << vocab_.size() << " d=" << dim_
      << " pooling=" << PoolingName(pooling_) << '\n';
  for (size_t r = 0; r < vocab_.size(); ++r) {
    out << vocab_.Word(static_cast<int>(r)) << '\t';
    for (size_t k = 0; k < dim_; ++k) {
      if (k > 0) out << ' ';
      out << FormatDouble(params_[r * dim_ + k]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("error writing " + path);
}

ToyEncoder ToyEncoder::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("#csmix-encoder", 0) != 0) {
    throw std::runtime_error(path + ": missing encoder header");
  }
  auto fields = HeaderFields(line);
  if (fields["version"] != "1") {
    throw std::runtime_error(path + ": unsupported encoder version");
  }
  ToyEncoder enc;
  enc.dim_ = static_cast<size_t>(ParseInt(fields["d"]));
  enc.pooling_ = ParsePooling(fields["pooling"]);
  const auto rows = static_cast<size_t>(ParseInt(fields["vocab"]));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error(path + ": malformed row");
    }
    const std::string word = line.substr(0, tab);
    if (enc.vocab_.size() == 0 && word != kUnknown) {
      throw std::runtime_error(path + ": first row must be " + kUnknown);
    }
    enc.vocab_.Intern(word);
    const auto values = SplitWhitespace(line.substr(tab + 1));
    if (values.size() != enc.dim_) {
      throw std::runtime_error(path + ": row width does not match d");
    }
    for (const auto& v : values) enc.params_.push_back(ParseDouble(v));
  }
  if (enc.vocab_.size() != rows) {
    throw std::runtime_error(path + ": row count does not match header");
  }
  return enc;
}

std::vector<std::string> CollectWords(const std::vector<Sentence>& sentences) {
  std::vector<std::string> words;
  std::set<std::string> seen;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      if (seen.insert(t).second) words.push_back(t);
    }
  }
  return words;
}

ObjectiveKind ParseObjectiveKind(const std::string& name) {
  if (name == "pool_cosine") return ObjectiveKind::kPoolCosine;
  if (name == "neg_margin") return ObjectiveKind::kNegMargin;
  if (name == "ranking") return ObjectiveKind::kRanking;
  if (name == "ams") return ObjectiveKind::kAms;
  if (name == "sentence_align") return ObjectiveKind::kSentenceAlign;
  throw std::invalid_argument("unknown objective '" + name + "'");
}

std::string ObjectiveKindName(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kPoolCosine: return "pool_cosine";
    case ObjectiveKind::kNegMargin: return "neg_margin";
    case ObjectiveKind::kRanking: return "ranking";
    case ObjectiveKind::kAms: return "ams";
    case ObjectiveKind::kSentenceAlign: return "sentence_align";
  }
  return "";
}

ObjectiveConfig ObjectiveConfig::ForKind(ObjectiveKind kind) {
  ObjectiveConfig c;
  c.kind = kind;
  c.pooling = kind == ObjectiveKind::kPoolCosine ? Pooling::kMax : Pooling::kMean;
  c.weight = kind == ObjectiveKind::kPoolCosine ? 10.0 : 1.0;
  return c;
}

void ObjectiveConfig::Validate() const {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be >= 0");
  if (!(margin >= 0.0)) throw std::invalid_argument("margin must be >= 0");
  if (!std::isfinite(weight)) throw std::invalid_argument("weight must be finite");
}

ObjectiveReport EvaluateObjective(const ToyEncoder& encoder,
                                  const Batch& batch,
                                  const ObjectiveConfig& config) {
  Evaluation e = Evaluator(encoder, config, true).Run(batch);
  ObjectiveReport r;
  r.loss = e.loss;
  r.gradient = std::move(e.gradient);
  r.items = e.items;
  r.skipped_items = e.skipped;
  r.touched = std::move(e.touched);
  return r;
}

double ObjectiveLoss(const ToyEncoder& encoder, const Batch& batch,
                     const ObjectiveConfig& config) {
  return Evaluator(encoder, config, false).Run(batch).loss;
}

GradcheckResult Gradcheck(const ToyEncoder& encoder, const Batch& batch,
                          const ObjectiveConfig& config, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  GradcheckResult result;
  if (batch.items.empty()) return result;
  const Evaluation base = Evaluator(encoder, config, true).Run(batch);
  ToyEncoder probe = encoder;
  auto& params = probe.params();
  for (size_t p : base.touched) {
    const double saved = params[p];
    params[p] = saved + step;
    const Evaluation plus = Evaluator(probe, config, false).Run(batch);
    params[p] = saved - step;
    const Evaluation minus = Evaluator(probe, config, false).Run(batch);
    params[p] = saved;
    if (plus.signature != base.signature || minus.signature != base.signature) {
      ++result.skipped;
      continue;
    }
    const double numeric = (plus.loss - minus.loss) / (2.0 * step);
    const double analytic = base.gradient[p];
    const double err = std::abs(analytic - numeric) /
                       std::max(1e-8, std::abs(analytic) + std::abs(numeric));
    result.max_rel_err = std::max(result.max_rel_err, err);
    ++result.checked;
  }
  return result;
}

std::vector<TraceRow> TrainEncoder(ToyEncoder& encoder,
                                   const std::vector<Batch>& batches,
                                   const ObjectiveConfig& config, size_t steps,
                                   double learning_rate) {
  if (batches.empty() && steps > 0) {
    throw std::invalid_argument("no training batches");
  }
  std::vector<TraceRow> trace;
  auto& params = encoder.params();
  for (size_t step = 0; step < steps; ++step) {
    const auto report =
        EvaluateObjective(encoder, batches[step % batches.size()], config);
    double sq = 0.0;
    for (double g : report.gradient) sq += g * g;
    const double norm = std::sqrt(sq);
    if (!std::isfinite(report.loss) || !std::isfinite(norm)) {
      throw std::runtime_error("training diverged at step " +
                               std::to_string(step) + " (loss " +
                               FormatDouble(report.loss) + ")");
    }
    trace.push_back({step, report.loss, norm});
    for (size_t p = 0; p < params.size(); ++p) {
      params[p] -= learning_rate * report.gradient[p];
    }
  }
  return trace;
}

std::string FormatTraceCsv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "step,loss,grad_norm\n";
  for (const auto& row : trace) {
    out << row.step << ',' << FormatDouble(row.loss) << ','
        << FormatDouble(row.grad_norm) << '\n';
  }
  return out.str();
}

double Cosine(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = Norm(a), nb = Norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return Dot(a, b) / (na * nb);
}

std::vector<std::string> SyntheticWords(size_t n) {
  std::vector<std::string> words;
  words.reserve(n);
  for (size_t i = 0; i < n; ++i) words.push_back("w" + std::to_string(i));
  return words;
}

Batch RandomBatch(const std::vector<std::string>& words, size_t batch_size,
                  size_t min_len, size_t max_len, Rng& rng) {
  if (words.empty() || min_len == 0 || max_len < min_len) {
    throw std::invalid_argument("bad random batch parameters");
  }
  auto sentence = [&] {
    Sentence s;
    const size_t len = min_len + rng.Index(max_len - min_len + 1);
    for (size_t t = 0; t < len; ++t) s.tokens.push_back(words[rng.Index(words.size())]);
    return s;
  };
  Batch batch;
  for (size_t i = 0; i < batch_size; ++i) {
    Example ex;
    ex.x = sentence();
    ex.y = sentence();
    ex.y_neg = sentence();
    batch.items.push_back(std::move(ex));
  }
  return batch;
}

}  // namespace csmix
