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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every tolerance is pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "proofbeam/datalog.h"
#include "proofbeam/fingerprint.h"
#include "proofbeam/hints.h"
#include "proofbeam/mock_backend.h"
#include "proofbeam/planner.h"
#include "proofbeam/premises.h"
#include "proofbeam/proposer.h"
#include "proofbeam/proposer_backends.h"
#include "proofbeam/rerank.h"
#include "proofbeam/rng.h"
#include "proofbeam/script.h"
#include "proofbeam/service.h"
#include "proofbeam/stepwise.h"
#include "proofbeam/text.h"
#include "proofbeam/verifier.h"
#include "testutil.h"

namespace proofbeam {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kTemperatureTol = 1e-12;
constexpr double kGradientTol = 1e-5;
constexpr double kAwrTol = 1e-9;
constexpr double kAccuracyFloor = 0.95;
constexpr double kCompletenessLimitS = 60.0;
constexpr double kEndToEndBudgetS = 30.0;

struct Verdict {
  bool ok = true;
  std::string detail;
};

// Collects the first few violations of a criterion.
class Audit {
 public:
  void expect(bool cond, const std::string& what) {
    ++checks_;
    if (cond) return;
    ++violations_;
    if (first_.empty()) first_ = what;
  }
  Verdict verdict(const std::string& summary) const {
    std::ostringstream s;
    s << summary << "; checks=" << checks_ << " violations=" << violations_;
    if (!first_.empty()) s << " first: " << first_;
    return {violations_ == 0 && checks_ > 0, s.str()};
  }

 private:
  long checks_ = 0;
  long violations_ = 0;
  std::string first_;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const char* kRevOutline =
    "lemma \"rev (rev xs) = xs\"\n"
    "proof (induction xs)\n"
    "  case Nil\n"
    "  show ?case by simp\n"
    "next\n"
    "  case (Cons a xs)\n"
    "  show ?case sorry\n"
    "qed";

bool is_outline_prompt(const ProposerCall& c) { return c.system.find("outline") != std::string::npos; }

// --- 1 ----------------------------------------------------------------------

Verdict completeness() {
  Audit audit;
  const auto t0 = Clock::now();
  int spaces = 0, solvable = 0;
  for (std::uint64_t seed = 0; spaces < 200; ++seed) {
    const int depth = 1 + static_cast<int>(seed % 5);
    const int branching = 1 + static_cast<int>((seed / 5) % 3);
    const int solutions = static_cast<int>((seed / 15) % 3);
    const SyntheticSpace space = generate_space(depth, branching, solutions, seed);
    ++spaces;
    const auto shortest = testing::bfs_shortest_proof(space);
    const bool want = shortest && *shortest <= depth;
    solvable += want;
    MockBackend mock(space);
    Verifier verifier(mock);
    OracleProposer oracle(mock.space());
    SearchConfig cfg;
    cfg.beam_width = branching;
    cfg.max_depth = depth;
    cfg.budget_s = 30;
    SearchDeps deps{&verifier, &oracle};
    const ProofResult r = prove(space.root_goal(), cfg, deps);
    audit.expect(r.solved == want, "seed " + std::to_string(seed) + " solved=" +
                                       std::to_string(r.solved) + " bfs=" + std::to_string(want));
    if (r.solved) audit.expect(verifier.verify_full(*r.script).success, "unverified script");
  }
  const double elapsed = seconds_since(t0);
  audit.expect(elapsed < kCompletenessLimitS, "runtime " + std::to_string(elapsed) + " s");
  return audit.verdict(std::to_string(spaces) + " spaces, " + std::to_string(solvable) +
                       " BFS-solvable, " + std::to_string(elapsed) + " s");
}

// --- 2 ----------------------------------------------------------------------

BeamEntry beam_entry(int n, std::size_t len, std::string hint) {
  BeamEntry e;
  e.subgoals = n;
  e.state_hint = std::move(hint);
  e.lines.assign(len, "apply simp");
  e.lines[0] = "lemma \"g\"";
  return e;
}

Verdict beam_order() {
  Audit audit;
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    std::vector<BeamEntry> in;
    for (std::uint64_t i = uniform_index(rng, 0, 14); i > 0; --i) {
      const int n = uniform_index(rng, 0, 7) == 0 ? kUnknownSubgoals
                                                 : static_cast<int>(uniform_index(rng, 0, 5));
      std::string hint = "goal " + std::to_string(uniform_index(rng, 0, 7));
      if (uniform_index(rng, 0, 1)) hint = "  " + hint + "\t";
      in.push_back(beam_entry(n, uniform_index(rng, 1, 6), hint));
    }
    const std::size_t width = uniform_index(rng, 1, 8);
    // Reference: lexicographic key with the sentinel mapped to +infinity,
    // stable on input order, first per fingerprint, then truncation.
    std::vector<std::size_t> idx(in.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    auto key = [&](std::size_t i) {
      const long n = in[i].subgoals == kUnknownSubgoals ? LONG_MAX : in[i].subgoals;
      return std::make_tuple(n, in[i].lines.size(), i);
    };
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    std::vector<std::size_t> want;
    std::set<std::string> seen;
    for (std::size_t i : idx) {
      if (want.size() == width) break;
      if (seen.insert(state_fingerprint(in[i].state_hint).hex()).second) want.push_back(i);
    }
    const auto got = expand_beam(in, width);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].subgoals == in[want[i]].subgoals && got[i].lines == in[want[i]].lines &&
             got[i].state_hint == in[want[i]].state_hint;
    }
    audit.expect(same, "case " + std::to_string(t));
  }
  return audit.verdict("1000 randomized entry sets");
}

// --- 3 ----------------------------------------------------------------------

Verdict temperatures() {
  Audit audit;
  for (int s = 0; s <= 20; ++s) {
    const double step = std::min(0.9, 0.5 + 0.1 * s);
    const double finish = std::min(0.6, 0.2 + 0.05 * s);
    audit.expect(std::abs(step_temperature(s) - step) <= kTemperatureTol, "step s=" + std::to_string(s));
    audit.expect(std::abs(finish_temperature(s) - finish) <= kTemperatureTol,
                 "finish s=" + std::to_string(s));
  }
  audit.expect(step_temperature(20) == 0.9, "step cap");
  audit.expect(finish_temperature(20) == 0.6, "finish cap");
  return audit.verdict("s in [0, 20], tol 1e-12");
}

// --- 4 ----------------------------------------------------------------------

Verdict warm_cache() {
  Audit audit;
  std::vector<SyntheticSpace> spaces = {testing::rev_space()};
  for (std::uint64_t seed = 1; spaces.size() < 6; ++seed) {
    SyntheticSpace s = generate_space(4, 3, 1, seed);
    if (testing::bfs_shortest_proof(s)) spaces.push_back(std::move(s));
  }
  std::uint64_t cold_calls = 0;
  for (const SyntheticSpace& space : spaces) {
    GlobalCache global;
    MockBackend mock(space);
    Verifier verifier(mock);
    OracleProposer oracle(mock.space(), 2, 9);
    SearchConfig cfg;
    cfg.beam_width = 3;
    cfg.max_depth = 5;
    SearchDeps deps{&verifier, &oracle};
    deps.global_cache = &global;
    const ProofResult first = prove(space.root_goal(), cfg, deps);
    const auto before = mock.calls();
    cold_calls += before;
    const ProofResult second = prove(space.root_goal(), cfg, deps);
    audit.expect(mock.calls() == before, "warm replay issued " +
                                             std::to_string(mock.calls() - before) + " calls");
    audit.expect(first.solved == second.solved, "outcome changed on replay");
    audit.expect(before > 0, "cold run made no calls");
  }
  return audit.verdict(std::to_string(spaces.size()) + " goals, " + std::to_string(cold_calls) +
                       " cold backend calls, 0 warm");
}

// --- 5 ----------------------------------------------------------------------

double gauss(std::mt19937_64& rng) {
  const double u1 = std::max(uniform_unit(rng), 1e-300);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Verdict reranker_quality() {
  Audit audit;
  std::mt19937_64 rng(55);
  std::vector<double> w(kFeatureDim);
  for (auto& v : w) v = gauss(rng);
  const double b = 0.3;
  auto sample = [&](int n) {
    std::vector<Example> out;
    while (static_cast<int>(out.size()) < n) {
      FeatureVector x(kFeatureDim);
      for (auto& v : x) v = gauss(rng);
      double m = b;
      for (std::size_t i = 0; i < x.size(); ++i) m += w[i] * x[i];
      if (std::abs(m) < 0.1) continue;  // keep a margin
      out.push_back({x, m > 0 ? 1 : 0, 1.0});
    }
    return out;
  };
  const auto train = sample(2000);
  const auto held = sample(1000);
  const RerankModel model = train_logistic(train);
  int correct = 0;
  for (const auto& e : held) correct += (predict(model, e.x) > 0.5) == (e.y == 1);
  const double acc = static_cast<double>(correct) / static_cast<double>(held.size());
  audit.expect(acc >= kAccuracyFloor, "accuracy " + std::to_string(acc));

  double worst = 0;
  TrainOptions opts;
  opts.l2 = 0.01;
  for (int inst = 0; inst < 50; ++inst) {
    std::vector<Example> data;
    const int n = 3 + static_cast<int>(uniform_index(rng, 0, 9));
    for (int i = 0; i < n; ++i) {
      FeatureVector x(kFeatureDim);
      for (auto& v : x) v = gauss(rng);
      data.push_back({x, static_cast<int>(uniform_index(rng, 0, 1)), 0.5 + uniform_unit(rng)});
    }
    std::vector<double> p(kFeatureDim + 1);
    for (auto& v : p) v = 0.5 * gauss(rng);
    std::vector<double> grad;
    logistic_objective(data, p, opts, &grad);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double h = 1e-6;
      auto plus = p, minus = p;
      plus[k] += h;
      minus[k] -= h;
      const double fd =
          (logistic_objective(data, plus, opts) - logistic_objective(data, minus, opts)) / (2 * h);
      const double rel = std::abs(fd - grad[k]) / std::max({std::abs(fd), std::abs(grad[k]), 1e-8});
      worst = std::max(worst, rel);
      audit.expect(rel <= kGradientTol, "instance " + std::to_string(inst) + " coord " + std::to_string(k));
    }
  }
  std::ostringstream s;
  s << "held-out accuracy " << acc << ", worst gradient rel err " << worst;
  return audit.verdict(s.str());
}

// --- 6 ----------------------------------------------------------------------

Verdict awr_degeneracy() {
  Audit audit;
  std::mt19937_64 rng(66);
  double worst = 0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Transition> ts;
    const double reward = gauss(rng) * 3;
    for (int i = 0; i < 200; ++i) {
      Transition t;
      t.x.resize(kFeatureDim);
      for (auto& v : t.x) v = gauss(rng);
      t.accepted = uniform_index(rng, 0, 1) == 1;
      t.depth = static_cast<int>(uniform_index(rng, 0, 4));
      t.subgoals_before = static_cast<int>(uniform_index(rng, 0, 4));
      t.reward = reward;
      ts.push_back(std::move(t));
    }
    std::vector<Example> plain;
    for (const auto& t : ts) plain.push_back({t.x, t.accepted ? 1 : 0, 1.0});
    const double beta = 0.2 + uniform_unit(rng);
    const RerankModel a = train_awr(ts, beta);
    const RerankModel l = train_logistic(plain);
    for (std::size_t i = 0; i < kFeatureDim; ++i) {
      const double d = std::abs(a.weights[i] - l.weights[i]);
      worst = std::max(worst, d);
      audit.expect(d <= kAwrTol, "weight " + std::to_string(i));
    }
    worst = std::max(worst, std::abs(a.bias - l.bias));
    audit.expect(std::abs(a.bias - l.bias) <= kAwrTol, "bias");
  }
  std::ostringstream s;
  s << "5 datasets, max |diff| " << worst;
  return audit.verdict(s.str());
}

// --- 7 ----------------------------------------------------------------------

std::vector<std::string> cosine_ranking(const std::vector<std::pair<std::string, std::string>>& docs,
                                        const std::string& query, std::size_t k) {
  std::map<std::string, int> df;
  std::vector<std::map<std::string, double>> tfs;
  for (const auto& d : docs) {
    std::map<std::string, double> tf;
    for (const auto& tok : text::tokenize(d.second)) tf[tok] += 1;
    for (const auto& kv : tf) df[kv.first] += 1;
    tfs.push_back(tf);
  }
  const double n = static_cast<double>(docs.size());
  auto weigh = [&](const std::map<std::string, double>& tf) {
    std::map<std::string, double> v;
    double norm = 0;
    for (const auto& [tok, c] : tf) {
      if (!df.count(tok)) continue;
      v[tok] = c * (std::log((1 + n) / (1 + df[tok])) + 1);
      norm += v[tok] * v[tok];
    }
    for (auto& kv : v) kv.second /= norm > 0 ? std::sqrt(norm) : 1.0;
    return v;
  };
  std::map<std::string, double> qtf;
  for (const auto& tok : text::tokenize(query)) qtf[tok] += 1;
  const auto q = weigh(qtf);
  std::vector<std::pair<double, std::string>> scored;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto d = weigh(tfs[i]);
    double s = 0;
    for (const auto& [tok, w] : q) {
      auto it = d.find(tok);
      if (it != d.end()) s += w * it->second;
    }
    scored.emplace_back(s, docs[i].first);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (std::abs(a.first - b.first) > 1e-12) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k && i < scored.size(); ++i) out.push_back(scored[i].second);
  return out;
}

Verdict retrieval() {
  Audit audit;
  std::mt19937_64 rng(77);
  static const std::vector<std::string> vocab = {"rev", "map", "xs", "ys", "length", "append", "zip",
                                                 "nat", "suc", "filter", "set", "card", "take", "drop"};
  auto words = [&](std::uint64_t lo, std::uint64_t hi) {
    std::string t;
    for (std::uint64_t j = uniform_index(rng, lo, hi); j > 0; --j) {
      t += vocab[uniform_index(rng, 0, vocab.size() - 1)] + " ";
    }
    return t;
  };
  for (int c = 0; c < 50; ++c) {
    std::vector<std::pair<std::string, std::string>> docs;
    const auto n = uniform_index(rng, 1, 100);
    for (std::uint64_t i = 0; i < n; ++i) docs.emplace_back("P" + std::to_string(i), words(1, 8));
    PremiseIndex idx;
    for (const auto& [id, t] : docs) idx.add({id, t, "", ""});
    idx.finalize();
    const std::string query = words(1, 5);
    const std::size_t k = uniform_index(rng, 1, 20);
    std::vector<std::string> got;
    for (const auto& s : idx.select(query, k)) got.push_back(s.id);
    audit.expect(got == cosine_ranking(docs, query, k), "corpus " + std::to_string(c));
  }
  for (int t = 0; t < 1000; ++t) {
    auto random_set = [&] {
      std::set<std::string> s;
      for (std::uint64_t i = uniform_index(rng, 0, 8); i > 0; --i) s.insert("t" + std::to_string(uniform_index(rng, 0, 12)));
      return std::vector<std::string>(s.begin(), s.end());
    };
    const auto a = random_set();
    const auto b = random_set();
    const double ab = jaccard(a, b);
    audit.expect(ab >= 0.0 && ab <= 1.0, "range");
    audit.expect(ab == jaccard(b, a), "symmetry");
    audit.expect(jaccard(a, a) == 1.0, "identity");
    std::vector<std::string> inter, uni;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
    if (!uni.empty()) {
      audit.expect(std::abs(ab - static_cast<double>(inter.size()) / uni.size()) < 1e-15, "value");
    }
  }
  return audit.verdict("50 corpora of <= 100 premises, 1000 set pairs");
}

// --- 8 ----------------------------------------------------------------------

std::vector<std::string> lexicon_oracle(const HintLexicon& lex, const std::string& goal, int k) {
  std::set<std::string> lemmas;
  for (const auto& kv : lex.entries) {
    for (const auto& p : kv.second) lemmas.insert(p.first);
  }
  const auto toks = text::tokenize(goal);
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& l : lemmas) {
    double s = 0;
    for (const auto& t : toks) {
      auto it = lex.entries.find(t);
      if (it == lex.entries.end()) continue;
      for (const auto& p : it->second) {
        if (p.first == l) s += p.second;
      }
    }
    if (s > 0) scored.emplace_back(-s, l);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (int i = 0; i < k && i < static_cast<int>(scored.size()); ++i) out.push_back(scored[i].second);
  return out;
}

Verdict micro_rag() {
  Audit audit;
  std::mt19937_64 rng(88);
  for (int trial = 0; trial < 200; ++trial) {
    HintLexicon lex;
    const auto entries = uniform_index(rng, 1, 1000);
    for (std::uint64_t i = 0; i < entries; ++i) {
      const std::string tok = "t" + std::to_string(uniform_index(rng, 0, 60));
      const std::string lemma = "L" + std::to_string(uniform_index(rng, 0, 80));
      auto& list = lex.entries[tok];
      if (std::none_of(list.begin(), list.end(), [&](const auto& p) { return p.first == lemma; })) {
        list.emplace_back(lemma, static_cast<double>(uniform_index(rng, 1, 5)));
      }
    }
    std::string goal;
    for (int j = 0; j < 8; ++j) goal += "t" + std::to_string(uniform_index(rng, 0, 70)) + " ";
    const int k = static_cast<int>(uniform_index(rng, 0, 16));
    audit.expect(lexicon_hints(lex, goal, k) == lexicon_oracle(lex, goal, k), "lexicon " + std::to_string(trial));
  }
  for (int t = 0; t < 2000; ++t) {
    std::vector<std::string> ctx, lex;
    for (std::uint64_t i = uniform_index(rng, 0, 12); i > 0; --i) ctx.push_back("h" + std::to_string(uniform_index(rng, 0, 25)));
    for (std::uint64_t i = uniform_index(rng, 0, 12); i > 0; --i) lex.push_back("h" + std::to_string(uniform_index(rng, 0, 25)));
    const HintSet hints = combine_hints(ctx, lex, static_cast<int>(uniform_index(rng, 0, 20)));
    std::string skeleton;
    for (std::uint64_t i = uniform_index(rng, 0, 40); i > 0; --i) skeleton += "h" + std::to_string(uniform_index(rng, 0, 25)) + " ";
    const int k_hint = static_cast<int>(uniform_index(rng, 0, 20));
    const int bonus = hint_bonus(skeleton, hints, k_hint);
    audit.expect(bonus >= 0 && bonus <= k_hint && bonus <= static_cast<int>(hints.size()),
                 "bonus " + std::to_string(bonus));
  }
  return audit.verdict("200 lexicons <= 1000 entries, 2000 bonus cases");
}

// --- 9 ----------------------------------------------------------------------

Verdict planner_caps() {
  Audit audit;
  MockBackend mock(testing::rev_space());
  Verifier verifier(mock);
  MemorySink sink;
  RunLogger logger(sink, "caps");
  FunctionProposer proposer([](const ProposerCall& c, std::size_t i) {
    if (is_outline_prompt(c)) return std::string(kRevOutline);
    const std::string bad = "show ?case by (magic " + std::to_string(i) + ")";
    if (c.user.find("KIND: case_block") != std::string::npos) return "case (Cons a xs)\n" + bad;
    return bad;
  });
  FunctionProposer nothing([](const ProposerCall&, std::size_t) { return std::string(); });
  PlannerDeps deps{&verifier, &proposer, &nothing};
  deps.logger = &logger;
  PlannerConfig cfg;
  cfg.temperatures = {0.3};
  cfg.samples_per_temp = 1;
  cfg.enforce_holes = false;
  cfg.budget_s = 3;
  cfg.fill_budget_s = 5;
  cfg.repair_budget_s = 5;
  cfg.repair_candidates = 1;
  cfg.regeneration_cap = 1;
  audit.expect(cfg.c1 == 2 && cfg.c2 == 3, "default caps");
  const PlanResult r = plan_auto("rev (rev xs) = xs", cfg, deps);
  audit.expect(!r.solved, "fixture must fail");
  audit.expect(r.regenerations == 1, "regenerations " + std::to_string(r.regenerations));

  // Generation 0: per-hole (stage, try) sequence, then regeneration.
  std::vector<std::pair<int, int>> seq;
  std::set<std::string> hids;
  bool regenerated = false;
  int fills_stage2 = 0;
  for (const auto& a : sink.attempts()) {
    if (a.type == attempt_type::kRegeneration) {
      regenerated = true;
      break;
    }
    if (a.type == attempt_type::kRepair) {
      seq.push_back({a.stage.value_or(-1), a.extra.value("try", 0)});
      hids.insert(a.hid.value_or(""));
    }
    if (a.type == attempt_type::kFill && a.stage.value_or(0) >= 2) ++fills_stage2;
  }
  const std::vector<std::pair<int, int>> want = {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {2, 3}};
  audit.expect(regenerated, "no regeneration record");
  audit.expect(hids.size() == 1, "holes " + std::to_string(hids.size()));
  audit.expect(seq == want, "sequence of " + std::to_string(seq.size()) + " repair records");
  audit.expect(fills_stage2 == 0, "fill attempted at stage 2");
  return audit.verdict("c1=2 stage-1 failures, regeneration after c2=3 stage-2 failures");
}

// --- 10, 11 -----------------------------------------------------------------

// Scripted adversary: outlines, fills and repair blocks drawn from a pool of
// plausible, broken, repeated and off-format replies.
class Adversary {
 public:
  // The first `good` entries of each pool can make progress; they are drawn
  // with probability p_good, the rest otherwise.
  Adversary(std::uint64_t seed, double p_good) : rng_(seed), p_good_(p_good) {}

  std::string reply(const ProposerCall& c) {
    if (is_outline_prompt(c)) return pick(outlines(), 1);
    if (c.system.find("Rewrite the block") != std::string::npos) return pick(repairs(), 2);
    return pick(steps(), 2);
  }

 private:
  const std::string& pick(const std::vector<std::string>& pool, std::size_t good) {
    if (uniform_unit(rng_) < p_good_) return pool[uniform_index(rng_, 0, good - 1)];
    return pool[uniform_index(rng_, good, pool.size() - 1)];
  }
  static const std::vector<std::string>& outlines() {
    static const std::vector<std::string> v = {
        kRevOutline,
        "lemma \"rev (rev xs) = xs\"\nproof (induction xs)\n  case Nil\n  show ?case by auto\nnext\n"
        "  case (Cons a xs)\n  show ?case by (metis magic)\nqed",
        "lemma \"something else\"\n  apply (induction xs)\n  apply simp\n  by auto",
        "```isabelle\nlemma \"rev (rev xs) = xs\"\n  apply (induction xs)\n  apply simp\n  sorry\n```",
        "Here is a proof:\nproof (induction xs)\n  case Nil\n  show ?case sorry\nqed",
        "lemma \"rev (rev xs) = xs\"\nproof (induction xs)\n  case Nil\n  apply simp\nnext\n  case (Cons a xs)\n"
        "  show ?case\n    apply simp\n    by blast\nqed",
        "I cannot prove this.",
        "",
    };
    return v;
  }
  static const std::vector<std::string>& repairs() {
    static const std::vector<std::string> v = {
        "show ?case by (simp add: rev_nil)",
        "show ?case\n  apply (simp add: rev_snoc)\n  by (metis append_same)",
        "show ?case by simp",
        "show ?case\n  apply simp\n  by auto",
        "show ?case by (magic)",
        "case (Cons a xs)\n  show ?case by (induct)",
        "case Nil\n  show ?case by simp",
        "proof -\n  show ?thesis by auto\nqed",
        "lemma \"rev (rev xs) = xs\"\n  apply (induction xs)\n  apply simp\n  by auto",
        "```\nhave \"x = x\" by simp\n```",
        "Sure! Let me think.",
        "qed",
        "apply simp\ndone",
        "",
    };
    return v;
  }
  static const std::vector<std::string>& steps() {
    static const std::vector<std::string> v = {
        "by (simp add: rev_nil)",
        "apply (simp add: rev_snoc)\nby (metis append_same)",
        "apply simp\nby auto",
        "by simp",
        "apply (induction xs)\napply simp",
        "apply auto\napply blast\nby metis",
        "1. apply simp\n2. by (magic)",
        "no idea",
        "",
    };
    return v;
  }

  std::mt19937_64 rng_;
  double p_good_;
};

// The rev space with closing steps no heuristic variant proposes.
SyntheticSpace adversarial_space() {
  return testing::space_from(R"js({
    "root": "r",
    "nodes": {
      "r": {"subgoals": 1, "goal": "rev (rev xs) = xs"},
      "ind": {"subgoals": 2, "goal": "rev (rev []) = []"},
      "cNil": {"subgoals": 1, "goal": "rev (rev []) = []"},
      "cCons": {"subgoals": 1, "goal": "rev (rev (a # xs)) = a # xs"},
      "c2": {"subgoals": 1, "goal": "rev (rev xs) @ [a] = xs @ [a]"},
      "t0": {"subgoals": 0}
    },
    "edges": [
      {"from": "r", "cmd": "proof (induction xs)", "to": "ind"},
      {"from": "r", "cmd": "apply (induction xs)", "to": "ind"},
      {"from": "ind", "cmd": "case Nil", "to": "cNil"},
      {"from": "ind", "cmd": "case (Cons a xs)", "to": "cCons"},
      {"from": "cNil", "cmd": "by (simp add: rev_nil)", "to": "t0"},
      {"from": "cCons", "cmd": "apply (simp add: rev_snoc)", "to": "c2"},
      {"from": "c2", "cmd": "by (metis append_same)", "to": "t0"}
    ]})js");
}

struct AdversarialOutcome {
  Verdict normalization;
  Verdict bans;
};

AdversarialOutcome adversarial_runs() {
  Audit norm, bans;
  const SyntheticSpace space = adversarial_space();
  MockBackend audit_mock(space);
  Verifier auditor(audit_mock);
  int solved = 0;
  long iterations = 0, checks = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    MockBackend mock(space);
    Verifier verifier(mock);
    static const double kGood[] = {0.5, 0.2, 0.05, 0.0};
    Adversary adversary(run, kGood[run % 4]);
    FunctionProposer proposer([&](const ProposerCall& c, std::size_t) { return adversary.reply(c); });
    MemorySink sink;
    RunLogger logger(sink, "adv-" + std::to_string(run));
    // Bans are keyed by (generation, hid, kind); a FIFO large enough never
    // evicts, so any repeated rejected fingerprint is a soundness violation.
    std::map<std::tuple<int, std::string, std::string>, std::set<std::string>> rejected;
    int generation = 0;
    PlannerDeps deps{&verifier, &proposer};
    deps.logger = &logger;
    deps.on_iteration = [&](const ProofScript& working) {
      ++iterations;
      const ProofScript s = parse_script(working.render());
      const auto holes = find_holes(s);
      const CheckResult r = auditor.check_script(s);
      for (const LineError& e : r.errors) {
        const bool in_hole = std::any_of(holes.begin(), holes.end(),
                                         [&](const Hole& h) { return h.lines().contains(e.line); });
        norm.expect(in_hole, "run " + std::to_string(run) + " line " + std::to_string(e.line) +
                                 ": " + e.message);
      }
      norm.expect(s == working, "reparse changed script");
    };
    deps.on_repair_check = [&](const std::string& hid, BlockKind kind, const std::string& fp) {
      ++checks;
      const auto& seen = rejected[{generation, hid, std::string(block_kind_name(kind))}];
      bans.expect(!seen.count(fp), "run " + std::to_string(run) + " rechecked banned " + fp);
    };
    PlannerConfig cfg;
    cfg.temperatures = {0.3, 0.7};
    cfg.samples_per_temp = 2;
    cfg.budget_s = 0.4;
    cfg.fill_budget_s = 0.2;
    cfg.repair_budget_s = 0.2;
    cfg.fill_depth = 3;
    cfg.ban_max = 100000;
    cfg.stall_limit = 8;
    cfg.enforce_holes = run % 2 == 0;
    cfg.regeneration_cap = static_cast<int>(run % 3);
    // Track rejections through the attempt log as it is written.
    struct Tracker : LogSink {
      std::function<void(const AttemptRecord&)> on_attempt;
      LogSink* inner = nullptr;
      void log_run(const RunRecord& r) override { inner->log_run(r); }
      void log_attempt(const AttemptRecord& a) override {
        on_attempt(a);
        inner->log_attempt(a);
      }
    } tracker;
    tracker.inner = &sink;
    tracker.on_attempt = [&](const AttemptRecord& a) {
      if (a.type == attempt_type::kRegeneration) generation = a.extra.value("generation", generation);
      if (a.type == attempt_type::kRepair && !a.success && a.candidate_fp && a.hid && a.block_kind) {
        rejected[{generation, *a.hid, *a.block_kind}].insert(*a.candidate_fp);
      }
    };
    RunLogger tracked(tracker, "adv-" + std::to_string(run));
    deps.logger = &tracked;
    const PlanResult r = Planner("rev (rev xs) = xs", cfg, deps).run();
    solved += r.solved;
    if (r.solved) norm.expect(auditor.verify_full(*r.script).success, "solved script fails");
    norm.expect(r.script.has_value(), "no script returned");
  }
  return {norm.verdict("100 runs, " + std::to_string(iterations) + " iterations audited, " +
                       std::to_string(solved) + " solved"),
          bans.verdict("100 runs, " + std::to_string(checks) + " repair checks")};
}

// --- 12 ---------------------------------------------------------------------

Verdict end_to_end() {
  Audit audit;
  MockBackend mock(testing::rev_space());
  Verifier verifier(mock);
  OracleProposer oracle(mock.space());
  FunctionProposer outline([](const ProposerCall& c, std::size_t) {
    return is_outline_prompt(c) ? std::string(kRevOutline) : std::string();
  });
  PlannerConfig cfg;
  cfg.enforce_holes = false;
  cfg.budget_s = kEndToEndBudgetS;
  const auto t0 = Clock::now();
  const PlanResult r = plan_auto("rev (rev xs) = xs", cfg, {&verifier, &outline, &oracle});
  const double elapsed = seconds_since(t0);
  audit.expect(r.solved, "not solved");
  audit.expect(r.script && find_holes(*r.script).empty(), "holes remain");
  audit.expect(r.script && verifier.verify_full(*r.script).success, "verify_full failed");
  audit.expect(r.repairs_attempted == 0, "repairs " + std::to_string(r.repairs_attempted));
  audit.expect(elapsed < kEndToEndBudgetS, "elapsed " + std::to_string(elapsed));
  std::ostringstream s;
  s << "solved in " << elapsed << " s, fills " << r.fills_attempted;
  return audit.verdict(s.str());
}

// --- 13 ---------------------------------------------------------------------

// Independent statement of the approved-prefix rule.
bool approved(const std::string& line) {
  if (line.empty() || line.find('\n') != std::string::npos) return false;
  if (line != text::collapse_whitespace(line)) return false;
  return line == "done" || line.rfind("apply ", 0) == 0 || line.rfind("by ", 0) == 0;
}

Verdict service_conformance() {
  Audit audit;
  // A wide space: many distinct goals, few warm-cache hits.
  const SyntheticSpace space = generate_space(5, 3, 3, 1313);
  MockBackend mock(space);
  FaultInjectingBackend faulty(mock);
  OracleProposer oracle(mock.space());
  std::mt19937_64 rng(1313);
  std::vector<std::string> goals = {"", "∀x. P x", "\x01\x02", "rev (rev xs) = xs"};
  for (const auto& [id, node] : space.nodes) {
    if (!node.goal.empty()) goals.push_back(node.goal);
  }
  static const std::vector<std::string> noise = {
      "apply simp",     "by auto", "done",  "lemma \"x\"", "sorry", "oops", "apply  (induction xs)",
      "```", "  by   simp  ", "qed", "apply", "byauto", "\tdone", "apply simp; rm -rf /", "\"",
      "apply (induction xs)", "1. apply simp", "- by auto", "apply simp\r", "by (metis foo)"};
  bool fuzzing = true;
  FunctionProposer fuzz([&](const ProposerCall& c, std::size_t) {
    if (!fuzzing || uniform_index(rng, 0, 1)) return oracle.complete(c.system, c.user, c.temperature, c.n);
    std::string out;
    for (std::uint64_t i = uniform_index(rng, 0, 6); i > 0; --i) out += noise[uniform_index(rng, 0, noise.size() - 1)] + "\n";
    return out;
  });
  ServiceConfig cfg;
  cfg.search.budget_s = 2;
  cfg.queue = 8;
  Service service(cfg, faulty, fuzz);
  service.start();
  httplib::Client client("127.0.0.1", service.port());
  client.set_read_timeout(60, 0);

  int ok = 0, solved = 0, rejected = 0, unavailable = 0;
  for (int i = 0; i < 1000; ++i) {
    faulty.crash_randomly(i % 2 == 0 ? 0.5 : 0.0, static_cast<std::uint64_t>(i));
    json body;
    switch (uniform_index(rng, 0, 9)) {
      case 0: body = json::array({1, 2}); break;
      case 1: body = {{"goal", 7}}; break;
      case 2: body = {{"goal", goals.back()}, {"beam", -1}}; break;
      default:
        body = {{"goal", goals[uniform_index(rng, 0, goals.size() - 1)]}};
        if (uniform_index(rng, 0, 1)) body["depth"] = uniform_index(rng, 1, 5);
        if (uniform_index(rng, 0, 1)) body["beam"] = uniform_index(rng, 1, 3);
    }
    std::string payload = body.dump();
    if (i % 97 == 0) payload = "{not json";
    const auto res = client.Post("/prove", payload, "application/json");
    audit.expect(static_cast<bool>(res), "request " + std::to_string(i) + " got no response");
    if (!res) continue;
    const int status = res->status;
    audit.expect(status == 200 || status == 400 || status == 503, "status " + std::to_string(status));
    if (status == 400) ++rejected;
    if (status == 503) ++unavailable;
    if (status != 200) continue;
    ++ok;
    const json reply = json::parse(res->body, nullptr, false);
    audit.expect(!reply.is_discarded() && reply.contains("commands"), "malformed reply");
    if (reply.is_discarded()) continue;
    solved += reply.value("ok", false);
    for (const auto& line : reply["commands"]) {
      audit.expect(line.is_string() && approved(line.get<std::string>()), "line " + line.dump());
    }
  }
  faulty.crash_randomly(0.0, 0);
  fuzzing = false;
  const auto health = client.Get("/health");
  audit.expect(health && health->status == 200, "health after fuzzing");
  const auto last = client.Post("/prove", json{{"goal", space.root_goal()}}.dump(), "application/json");
  audit.expect(last && last->status == 200 && json::parse(last->body)["ok"].get<bool>(),
               "service unusable after crashes");
  service.stop();
  audit.expect(faulty.crashes() > 0, "no crash was injected");
  std::ostringstream s;
  s << "1000 requests: " << ok << " ok (" << solved << " solved), " << rejected << " rejected, "
    << unavailable << " unavailable; " << faulty.crashes() << " backend crashes injected";
  return audit.verdict(s.str());
}

// --- 14 ---------------------------------------------------------------------

Verdict log_integrity() {
  Audit audit;
  const std::string dir = testing::temp_dir("acceptance_logs");
  MockBackend mock(testing::rev_space());
  OracleProposer oracle(mock.space(), 2, 5);
  FunctionProposer mixed([&](const ProposerCall& c, std::size_t i) {
    if (is_outline_prompt(c)) return std::string(kRevOutline);
    if (c.system.find("Rewrite the block") != std::string::npos) {
      return std::string(i % 2 ? "show ?case by (magic)" : "show ?case\n  apply simp\n  by auto");
    }
    return oracle.complete(c.system, c.user, c.temperature, c.n);
  });
  ServiceConfig cfg;
  cfg.log_dir = dir;
  cfg.search.budget_s = 10;
  cfg.planner.budget_s = 5;
  cfg.planner.temperatures = {0.3};
  cfg.planner.samples_per_temp = 1;
  Service service(cfg, mock, mixed);

  std::vector<std::uint64_t> deltas;
  const std::vector<json> requests = {
      {{"goal", "rev (rev xs) = xs"}},
      {{"goal", "rev (rev xs) = xs"}, {"depth", 1}},
      {{"goal", "rev (rev (a # xs)) = a # xs"}},
  };
  for (const json& r : requests) {
    const auto before = service.verifier().evaluations();
    service.handle_prove(r);
    deltas.push_back(service.verifier().evaluations() - before);
  }
  for (const char* mode : {"auto", "outline"}) {
    const auto before = service.verifier().evaluations();
    service.handle_plan({{"goal", "rev (rev xs) = xs"}, {"mode", mode}});
    deltas.push_back(service.verifier().evaluations() - before);
  }

  std::vector<std::string> run_ids;
  std::ifstream runs(dir + "/runs.jsonl");
  for (std::string line; std::getline(runs, line);) {
    const json j = json::parse(line);
    const RunRecord rec = run_from_json(j);
    audit.expect(to_json(rec) == j, "run record round trip");
    audit.expect(run_from_json(to_json(rec)) == rec, "run record field equality");
    run_ids.push_back(rec.run_id);
  }
  std::map<std::string, std::uint64_t> per_run;
  std::size_t lines = 0;
  std::ifstream attempts(dir + "/attempts.jsonl");
  for (std::string line; std::getline(attempts, line);) {
    ++lines;
    const json j = json::parse(line);
    const AttemptRecord rec = attempt_from_json(j);
    audit.expect(to_json(rec) == j, "attempt round trip at line " + std::to_string(lines));
    audit.expect(attempt_from_json(to_json(rec)) == rec, "attempt field equality");
    ++per_run[rec.run_id];
  }
  audit.expect(run_ids.size() == deltas.size(), "runs logged " + std::to_string(run_ids.size()));
  for (std::size_t i = 0; i < std::min(run_ids.size(), deltas.size()); ++i) {
    audit.expect(per_run[run_ids[i]] == deltas[i], "run " + std::to_string(i) + ": " +
                                                       std::to_string(per_run[run_ids[i]]) + " lines vs " +
                                                       std::to_string(deltas[i]) + " calls");
  }
  return audit.verdict(std::to_string(run_ids.size()) + " runs, " + std::to_string(lines) +
                       " attempt lines");
}

}  // namespace
}  // namespace proofbeam

int main() {
  using namespace proofbeam;
  std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"search completeness vs BFS", completeness},
      {"beam order conformance", beam_order},
      {"temperature schedule", temperatures},
      {"warm cache makes no backend calls", warm_cache},
      {"reranker quality and gradients", reranker_quality},
      {"AWR degeneracy", awr_degeneracy},
      {"retrieval oracle equivalence", retrieval},
      {"micro-RAG lexicon and bonus", micro_rag},
      {"planner caps", planner_caps},
  };
  AdversarialOutcome adversarial;
  bool adversarial_done = false;
  auto adversarial_once = [&]() -> AdversarialOutcome& {
    if (!adversarial_done) {
      adversarial = adversarial_runs();
      adversarial_done = true;
    }
    return adversarial;
  };
  criteria.push_back({"normalization discipline", [&] { return adversarial_once().normalization; }});
  criteria.push_back({"ban-list soundness", [&] { return adversarial_once().bans; }});
  criteria.push_back({"end-to-end auto mode", end_to_end});
  criteria.push_back({"service conformance", service_conformance});
  criteria.push_back({"log integrity", log_integrity});

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.ok;
    std::printf("%s %2zu. %s (%.2fs): %s\n", v.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), s,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
