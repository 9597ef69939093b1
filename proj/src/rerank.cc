// Copyright 2026 The Proofbeam Authors. All Rights Reserved.
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
// =============================================================================

#include "proofbeam/rerank.h"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include "proofbeam/error.h"
#include "proofbeam/text.h"

namespace proofbeam {

using nlohmann::json;

namespace {

bool contains_any(std::string_view s, std::initializer_list<std::string_view> needles) {
  return std::any_of(needles.begin(), needles.end(),
                     [&](std::string_view n) { return s.find(n) != std::string_view::npos; });
}

bool has_word(std::string_view s, std::string_view word) {
  std::size_t pos = 0;
  while ((pos = s.find(word, pos)) != std::string_view::npos) {
    const bool left = pos == 0 || !text::is_word_char(s[pos - 1]);
    const std::size_t end = pos + word.size();
    const bool right = end >= s.size() || !text::is_word_char(s[end]);
    if (left && right) return true;
    pos = end;
  }
  return false;
}

bool has_numeral(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') continue;
    if (i > 0 && (text::is_word_char(s[i - 1]) || s[i - 1] == '\'')) continue;
    std::size_t j = i;
    while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
    if (j >= s.size() || !text::is_word_char(s[j])) return true;
    i = j;
  }
  return false;
}

double parse_double(std::string_view tok) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw CorruptModel("bad number in model file: " + std::string(tok));
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// log(1 + e^z), stable for large |z|.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::vector<double> class_weights(const std::vector<Example>& data, bool balance) {
  std::size_t pos = 0;
  for (const auto& e : data) pos += e.y == 1;
  const std::size_t neg = data.size() - pos;
  if (!balance || pos == 0 || neg == 0) return {1.0, 1.0};
  const double n = static_cast<double>(data.size());
  return {n / (2.0 * static_cast<double>(neg)), n / (2.0 * static_cast<double>(pos))};
}

}  // namespace

GoalFlags goal_flags(std::string_view s) {
  GoalFlags f;
  f.listy = contains_any(s, {"#", "@", "[", "\\<Colon>"}) || has_word(s, "Cons") ||
            has_word(s, "Nil");
  f.natty = has_word(s, "Suc") || has_word(s, "nat") || has_numeral(s);
  f.sety = contains_any(s, {"\xE2\x88\x88", "\xE2\x8A\x86", "\xE2\x88\xAA", "\xE2\x88\xA9",
                            "\xE2\x88\x89", "\xE2\x8A\x82", "\\<in>", "\\<subseteq>",
                            "\\<union>", "\\<inter>"});
  f.quantifier = contains_any(s, {"\xE2\x88\x80", "\xE2\x88\x83", "\xE2\x8B\x80", "\\<forall>",
                                  "\\<exists>", "\\<And>"}) ||
                 has_word(s, "ALL") || has_word(s, "EX");
  f.boolean = contains_any(s, {"\xE2\x88\xA7", "\xE2\x88\xA8", "\xC2\xAC", "\xE2\x9F\xB6",
                               "\xE2\x9F\xB7", "-->", "\\<and>", "\\<or>", "\\<not>",
                               "\\<longrightarrow>"});
  return f;
}

std::string method_token(std::string_view command) {
  std::string_view c = text::trim(command);
  for (std::string_view kw : {"apply", "by"}) {
    if (c.starts_with(kw) && (c.size() == kw.size() || !text::is_word_char(c[kw.size()]))) {
      c = text::trim(c.substr(kw.size()));
      break;
    }
  }
  if (c == "done") return {};
  while (!c.empty() && (c.front() == '(' || c.front() == ' ')) c.remove_prefix(1);
  std::size_t n = 0;
  while (n < c.size() && text::is_word_char(c[n])) ++n;
  return std::string(c.substr(0, n));
}

std::optional<std::size_t> tactic_index(std::string_view command) {
  const std::string m = method_token(command);
  for (std::size_t i = 0; i < kTacticVocabulary.size(); ++i) {
    if (kTacticVocabulary[i] == m) return i;
  }
  return std::nullopt;
}

FeatureVector featurize(const FeatureContext& ctx, std::string_view candidate,
                        const PremiseStats& stats) {
  FeatureVector x(kFeatureDim, 0.0);
  x[slot::kDepth] = ctx.depth;
  x[slot::kSubgoals] = ctx.subgoals.value_or(0);
  x[slot::kElapsed] = ctx.elapsed_s;
  x[slot::kCacheHit] = ctx.cache_hit ? 1.0 : 0.0;
  const GoalFlags f = goal_flags(ctx.goal + "\n" + ctx.state_hint);
  x[slot::kListy] = f.listy;
  x[slot::kNatty] = f.natty;
  x[slot::kSety] = f.sety;
  x[slot::kQuantifier] = f.quantifier;
  x[slot::kBoolean] = f.boolean;
  if (auto t = tactic_index(candidate)) x[slot::kTactic + *t] = 1.0;
  x[slot::kPremiseTop] = stats.top;
  x[slot::kPremiseMean] = stats.mean;
  x[slot::kPremiseOverlap] = stats.overlap;
  x[slot::kPremiseCount] = stats.count;
  return x;
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::kLogistic ? "logistic" : "linear_q";
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double raw_score(const RerankModel& model, const FeatureVector& x) {
  if (x.size() != kFeatureDim || model.weights.size() != kFeatureDim) {
    throw DimensionMismatch("feature vector has length " + std::to_string(x.size()) +
                            ", expected " + std::to_string(kFeatureDim));
  }
  double z = model.bias;
  for (std::size_t i = 0; i < kFeatureDim; ++i) z += model.weights[i] * x[i];
  return z;
}

double predict(const RerankModel& model, const FeatureVector& x) {
  return sigmoid(raw_score(model, x));
}

double logistic_objective(const std::vector<Example>& data, const std::vector<double>& params,
                          const TrainOptions& opts, std::vector<double>* grad) {
  const std::size_t d = params.size() - 1;
  const std::vector<double> cw = class_weights(data, opts.class_balance);
  if (grad) grad->assign(params.size(), 0.0);
  double total_w = 0.0;
  double loss = 0.0;
  for (const auto& e : data) {
    if (e.x.size() != d) throw DimensionMismatch("example has wrong feature length");
    const double w = e.weight * cw[e.y == 1 ? 1 : 0];
    double z = params[d];
    for (std::size_t i = 0; i < d; ++i) z += params[i] * e.x[i];
    loss += w * (softplus(z) - (e.y == 1 ? z : 0.0));
    total_w += w;
    if (grad) {
      const double r = w * (sigmoid(z) - (e.y == 1 ? 1.0 : 0.0));
      for (std::size_t i = 0; i < d; ++i) (*grad)[i] += r * e.x[i];
      (*grad)[d] += r;
    }
  }
  if (total_w <= 0.0) total_w = 1.0;
  loss /= total_w;
  double reg = 0.0;
  for (std::size_t i = 0; i < d; ++i) reg += params[i] * params[i];
  loss += 0.5 * opts.l2 * reg;
  if (grad) {
    for (double& g : *grad) g /= total_w;
    for (std::size_t i = 0; i < d; ++i) (*grad)[i] += opts.l2 * params[i];
  }
  return loss;
}

RerankModel train_logistic(const std::vector<Example>& data, const TrainOptions& opts) {
  if (data.empty()) throw std::invalid_argument("train_logistic: empty dataset");
  RerankModel model;
  model.kind = ModelKind::kLogistic;
  model.meta["trainer"] = "logistic";
  model.meta["examples"] = std::to_string(data.size());
  std::size_t pos = 0;
  for (const auto& e : data) pos += e.y == 1;
  if (pos == 0 || pos == data.size()) {
    const double p = (static_cast<double>(pos) + 1.0) / (static_cast<double>(data.size()) + 2.0);
    model.bias = std::log(p / (1.0 - p));
    model.degenerate = true;
    model.meta["warning"] = "degenerate dataset: single class";
    std::vector<double> params(model.weights);
    params.push_back(model.bias);
    model.final_loss = logistic_objective(data, params, opts);
    if (opts.loss_trace) opts.loss_trace->push_back(model.final_loss);
    return model;
  }
  std::vector<double> params(kFeatureDim + 1, 0.0);
  std::vector<double> grad;
  std::vector<double> trial(params.size());
  double loss = logistic_objective(data, params, opts, &grad);
  if (opts.loss_trace) opts.loss_trace->push_back(loss);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    double lr = opts.learning_rate;
    double next = loss;
    while (lr > 1e-12) {
      for (std::size_t i = 0; i < params.size(); ++i) trial[i] = params[i] - lr * grad[i];
      next = logistic_objective(data, trial, opts);
      if (next <= loss) break;
      lr *= 0.5;
    }
    if (next > loss) break;
    params = trial;
    loss = logistic_objective(data, params, opts, &grad);
    if (opts.loss_trace) opts.loss_trace->push_back(loss);
  }
  std::copy(params.begin(), params.begin() + kFeatureDim, model.weights.begin());
  model.bias = params[kFeatureDim];
  model.final_loss = loss;
  return model;
}

std::vector<Transition> build_rewards(const std::vector<AttemptRecord>& episode) {
  std::vector<Transition> out;
  std::vector<const AttemptRecord*> src;
  for (const auto& a : episode) {
    if (a.type != attempt_type::kStep && a.type != attempt_type::kFinisher) continue;
    Transition t;
    t.x = a.features;
    t.x.resize(kFeatureDim, 0.0);
    t.accepted = a.success;
    t.depth = a.depth;
    t.subgoals_before = a.subgoals_before;
    t.subgoals_after = a.subgoals_after;
    if (a.success && a.type == attempt_type::kFinisher && !t.subgoals_after) t.subgoals_after = 0;
    if (t.accepted && t.subgoals_before && t.subgoals_after) {
      t.reward = *t.subgoals_before - *t.subgoals_after;
    }
    out.push_back(std::move(t));
    src.push_back(&a);
  }
  for (std::size_t i = out.size(); i-- > 0;) {
    if (out[i].accepted && src[i]->type == attempt_type::kFinisher) {
      out[i].terminal = true;
      out[i].reward += kCompletionBonus;
      break;
    }
  }
  std::unordered_map<std::string, std::vector<std::size_t>> by_prefix;
  for (std::size_t i = 0; i < src.size(); ++i) by_prefix[src[i]->prefix_fp].push_back(i);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out[i].accepted || out[i].terminal || !src[i]->result_fp) continue;
    auto it = by_prefix.find(*src[i]->result_fp);
    if (it != by_prefix.end()) out[i].next = it->second;
  }
  return out;
}

double awr_weight(double advantage, double beta) {
  return std::exp(std::clamp(advantage / beta, -kAdvantageClamp, kAdvantageClamp));
}

std::vector<double> advantages(const std::vector<Transition>& ts) {
  struct Bucket {
    double sum = 0;
    int count = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
  };
  std::map<std::pair<int, int>, Bucket> buckets;
  auto key = [](const Transition& t) { return std::make_pair(t.depth, t.subgoals_before.value_or(-1)); };
  for (const auto& t : ts) {
    auto& b = buckets[key(t)];
    b.sum += t.reward;
    b.count += 1;
    b.lo = std::min(b.lo, t.reward);
    b.hi = std::max(b.hi, t.reward);
  }
  std::vector<double> out;
  out.reserve(ts.size());
  for (const auto& t : ts) {
    const auto& b = buckets[key(t)];
    // A constant bucket has zero advantage exactly, not up to rounding.
    out.push_back(b.lo == b.hi ? 0.0 : t.reward - b.sum / b.count);
  }
  return out;
}

RerankModel train_awr(const std::vector<Transition>& ts, double beta, const TrainOptions& opts) {
  if (ts.empty()) throw std::invalid_argument("train_awr: no transitions");
  if (!(beta > 0)) throw std::invalid_argument("train_awr: beta must be positive");
  const auto adv = advantages(ts);
  std::vector<Example> data;
  data.reserve(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    data.push_back({ts[i].x, ts[i].accepted ? 1 : 0, awr_weight(adv[i], beta)});
  }
  RerankModel model = train_logistic(data, opts);
  model.meta["trainer"] = "awr";
  model.meta["beta"] = format_double(beta);
  return model;
}

RerankModel train_fitted_q(const std::vector<Transition>& ts, double gamma, int iterations,
                           double ridge) {
  if (ts.empty()) throw std::invalid_argument("train_fitted_q: no transitions");
  if (gamma < 0 || gamma >= 1) throw std::invalid_argument("train_fitted_q: gamma must be in [0,1)");
  const auto n = static_cast<Eigen::Index>(ts.size());
  const auto d = static_cast<Eigen::Index>(kFeatureDim);
  Eigen::MatrixXd a(n, d + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& x = ts[static_cast<std::size_t>(i)].x;
    if (x.size() != kFeatureDim) throw DimensionMismatch("transition has wrong feature length");
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = x[static_cast<std::size_t>(j)];
    a(i, d) = 1.0;
  }
  Eigen::MatrixXd gram = a.transpose() * a;
  for (Eigen::Index j = 0; j < d; ++j) gram(j, j) += ridge;
  const auto solver = gram.ldlt();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y(n);
  for (int it = 0; it < std::max(1, iterations); ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& t = ts[static_cast<std::size_t>(i)];
      double best = 0.0;
      bool any = false;
      if (!t.terminal) {
        for (std::size_t j : t.next) {
          const double v = q(static_cast<Eigen::Index>(j));
          best = any ? std::max(best, v) : v;
          any = true;
        }
      }
      y(i) = t.reward + (any ? gamma * best : 0.0);
    }
    theta = solver.solve(a.transpose() * y);
    q = a * theta;
  }
  RerankModel model;
  model.kind = ModelKind::kLinearQ;
  for (Eigen::Index j = 0; j < d; ++j) model.weights[static_cast<std::size_t>(j)] = theta(j);
  model.bias = theta(d);
  model.final_loss = (q - y).squaredNorm() / static_cast<double>(n);
  model.meta["trainer"] = "fitted_q";
  model.meta["gamma"] = format_double(gamma);
  model.meta["iterations"] = std::to_string(iterations);
  return model;
}

std::string serialize_model(const RerankModel& m) {
  std::ostringstream out;
  out << "RERANK v1 " << to_string(m.kind) << '\n';
  out << format_double(m.bias) << '\n';
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    out << (i ? " " : "") << format_double(m.weights[i]);
  }
  out << '\n';
  out << "degenerate " << (m.degenerate ? 1 : 0) << '\n';
  out << "final_loss " << format_double(m.final_loss) << '\n';
  for (const auto& [k, v] : m.meta) out << "meta " << k << ' ' << json(v).dump() << '\n';
  return out.str();
}

RerankModel parse_model(std::string_view text_in) {
  const auto lines = text::split_lines(text_in);
  if (lines.size() < 3) throw CorruptModel("model file is truncated");
  std::istringstream head(lines[0]);
  std::string magic, version, kind;
  head >> magic >> version >> kind;
  if (magic != "RERANK" || version.size() < 2 || version[0] != 'v') {
    throw CorruptModel("not a reranker model file");
  }
  int v = 0;
  const auto [p, ec] = std::from_chars(version.data() + 1, version.data() + version.size(), v);
  if (ec != std::errc() || p != version.data() + version.size()) {
    throw CorruptModel("bad version tag " + version);
  }
  if (v != 1) throw FormatVersionMismatch("unsupported model format " + version);
  RerankModel m;
  if (kind == "logistic") {
    m.kind = ModelKind::kLogistic;
  } else if (kind == "linear_q") {
    m.kind = ModelKind::kLinearQ;
  } else {
    throw CorruptModel("unknown model kind " + kind);
  }
  m.bias = parse_double(text::trim(lines[1]));
  std::istringstream ws(lines[2]);
  std::vector<double> w;
  for (std::string tok; ws >> tok;) w.push_back(parse_double(tok));
  if (w.size() != kFeatureDim) {
    throw CorruptModel("expected " + std::to_string(kFeatureDim) + " weights, found " +
                       std::to_string(w.size()));
  }
  m.weights = std::move(w);
  for (std::size_t i = 3; i < lines.size(); ++i) {
    const std::string_view l = text::trim(lines[i]);
    if (l.empty()) continue;
    const auto sp = l.find(' ');
    const std::string_view key = l.substr(0, sp);
    const std::string_view rest = sp == std::string_view::npos ? "" : text::trim(l.substr(sp + 1));
    if (key == "degenerate") {
      m.degenerate = rest == "1";
    } else if (key == "final_loss") {
      m.final_loss = parse_double(rest);
    } else if (key == "meta") {
      const auto sp2 = rest.find(' ');
      if (sp2 == std::string_view::npos) throw CorruptModel("bad metadata line");
      json val = json::parse(rest.substr(sp2 + 1), nullptr, false);
      if (val.is_discarded() || !val.is_string()) throw CorruptModel("bad metadata value");
      m.meta[std::string(rest.substr(0, sp2))] = val.get<std::string>();
    } else {
      throw CorruptModel("unknown model line: " + std::string(key));
    }
  }
  return m;
}

void save_model(const RerankModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write model file " + path);
  out << serialize_model(model);
  if (!out) throw std::runtime_error("failed writing model file " + path);
}

RerankModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptModel("cannot read model file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace proofbeam
