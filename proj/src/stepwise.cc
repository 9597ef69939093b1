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

#include "proofbeam/stepwise.h"

#include <algorithm>
#include <chrono>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "proofbeam/fingerprint.h"
#include "proofbeam/text.h"

namespace proofbeam {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string prefix_fp(const std::vector<std::string>& lines) {
  return state_fingerprint(text::join_lines(lines)).hex();
}

std::string with_step_fp(std::vector<std::string> lines, const std::string& step) {
  lines.push_back(step);
  return prefix_fp(lines);
}

bool cached(const StepCache& cache, const std::vector<std::string>& prefix,
            std::string_view candidate, CheckMode mode) {
  const std::string key = step_cache_key(prefix, candidate, mode);
  if (cache.per_run.count(key)) return true;
  return cache.global != nullptr && cache.global->contains(key);
}

}  // namespace

json SearchConfig::to_json() const {
  return json{{"beam_width", beam_width},
              {"max_depth", max_depth},
              {"budget_s", budget_s},
              {"candidates", candidates},
              {"lambda", lambda},
              {"refute_interval", refute_interval},
              {"finish_trigger", finish_trigger},
              {"step_timeout_ms", step_timeout.count()},
              {"refute", refute},
              {"premise_k_select", premise_k_select},
              {"premise_k_rerank", premise_k_rerank},
              {"helpful_facts", helpful_facts},
              {"premise_backend", premise_backend == RetrievalBackend::kTfidf ? "tfidf" : "overlap"}};
}

SearchConfig SearchConfig::from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("search config must be an object");
  SearchConfig c;
  try {
    c.beam_width = j.value("beam_width", c.beam_width);
    c.max_depth = j.value("max_depth", c.max_depth);
    c.budget_s = j.value("budget_s", c.budget_s);
    c.candidates = j.value("candidates", c.candidates);
    c.lambda = j.value("lambda", c.lambda);
    c.refute_interval = j.value("refute_interval", c.refute_interval);
    c.finish_trigger = j.value("finish_trigger", c.finish_trigger);
    c.step_timeout = Millis(j.value("step_timeout_ms", static_cast<std::int64_t>(c.step_timeout.count())));
    c.refute = j.value("refute", c.refute);
    c.premise_k_select = j.value("premise_k_select", c.premise_k_select);
    c.premise_k_rerank = j.value("premise_k_rerank", c.premise_k_rerank);
    c.helpful_facts = j.value("helpful_facts", c.helpful_facts);
    const std::string backend = j.value("premise_backend", std::string("tfidf"));
    if (backend == "tfidf") {
      c.premise_backend = RetrievalBackend::kTfidf;
    } else if (backend == "overlap") {
      c.premise_backend = RetrievalBackend::kOverlap;
    } else {
      throw std::invalid_argument("unknown premise backend " + backend);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad search config: ") + e.what());
  }
  c.validate();
  return c;
}

void SearchConfig::validate() const {
  if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (!(budget_s > 0)) throw std::invalid_argument("budget must be positive");
  if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  if (refute_interval < 1) throw std::invalid_argument("refute_interval must be >= 1");
  if (candidates < 1) throw std::invalid_argument("candidates must be >= 1");
}

std::vector<BeamEntry> expand_beam(std::vector<BeamEntry> successes, std::size_t width) {
  std::stable_sort(successes.begin(), successes.end(), [](const BeamEntry& a, const BeamEntry& b) {
    if (a.subgoals != b.subgoals) return a.subgoals < b.subgoals;
    return a.length() < b.length();
  });
  std::vector<BeamEntry> out;
  std::unordered_set<std::string> seen;
  for (auto& e : successes) {
    if (out.size() == width) break;
    if (!seen.insert(state_fingerprint(e.state_hint).hex()).second) continue;
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

std::vector<RankedCandidate> order_featurized(const std::vector<std::string>& candidates,
                                              std::vector<FeatureVector> features,
                                              const RerankModel* reranker, double lambda) {
  std::vector<RankedCandidate> out;
  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    RankedCandidate c;
    c.command = candidates[i];
    c.index = i;
    c.features = std::move(features[i]);
    if (reranker != nullptr) c.reranker_score = predict(*reranker, c.features);
    c.key = static_cast<double>(i) - lambda * c.reranker_score;
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedCandidate& a, const RankedCandidate& b) { return a.key < b.key; });
  return out;
}

}  // namespace

std::vector<RankedCandidate> order_candidates(const std::vector<std::string>& candidates,
                                              const FeatureContext& ctx,
                                              const RerankModel* reranker, double lambda,
                                              const std::vector<PremiseStats>& stats) {
  std::vector<FeatureVector> features;
  features.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    features.push_back(featurize(ctx, candidates[i], i < stats.size() ? stats[i] : PremiseStats{}));
  }
  return order_featurized(candidates, std::move(features), reranker, lambda);
}

bool has_logical_structure(std::string_view text) {
  static const std::regex kWords(R"((^|[^A-Za-z0-9_])(All|Ex|ALL|EX)([^A-Za-z0-9_]|$))");
  for (std::string_view sym : {"\xE2\x88\x80", "\xE2\x88\x83", "\xE2\x88\xA7", "\xE2\x88\xA8",
                               "\xC2\xAC", "\xE2\x9F\xB6", "\xE2\x9F\xB7", "-->", "\\<forall>",
                               "\\<exists>", "\\<and>", "\\<or>", "\\<not>",
                               "\\<longrightarrow>"}) {
    if (text.find(sym) != std::string_view::npos) return true;
  }
  return std::regex_search(text.begin(), text.end(), kWords);
}

bool should_refute(std::string_view goal, std::string_view state_hint, int round, int interval) {
  if (interval < 1) throw std::invalid_argument("refute interval must be >= 1");
  if (round % interval != 0) return false;
  return has_logical_structure(goal) || has_logical_structure(state_hint);
}

namespace {

class Search {
 public:
  Search(std::string_view goal, const SearchConfig& cfg, SearchDeps& deps)
      : goal_(goal), cfg_(cfg), deps_(deps), t0_(Clock::now()) {
    cache_.global = deps.global_cache;
  }

  ProofResult run() {
    BeamEntry root;
    root.lines = {make_header(goal_)};
    std::vector<BeamEntry> beam = {root};
    best_ = root;
    int best_min = kUnknownSubgoals;
    int stagnation = 0;
    for (int round = 1; round <= cfg_.max_depth; ++round) {
      if (out_of_time()) break;
      result_.depth_reached = round;
      RoundTrace trace;
      trace.round = round;
      std::vector<BeamEntry> successes;
      for (const BeamEntry& entry : beam) {
        if (out_of_time()) break;
        if (refute_prunes(entry, round)) {
          ++trace.pruned;
          continue;
        }
        ++result_.expansions;
        if (expand(entry, round, stagnation, successes)) return finish();
      }
      trace.successes = successes.size();
      if (successes.empty()) {
        result_.rounds.push_back(trace);
        break;
      }
      beam = expand_beam(std::move(successes), static_cast<std::size_t>(cfg_.beam_width));
      const int min_n = beam.front().subgoals;
      if (min_n < best_min) {
        best_min = min_n;
        stagnation = 0;
      } else {
        ++stagnation;
      }
      if (beam.front().subgoals < best_.subgoals ||
          (beam.front().subgoals == best_.subgoals && beam.front().length() < best_.length())) {
        best_ = beam.front();
      }
      for (const auto& e : beam) trace.fingerprints.push_back(state_fingerprint(e.state_hint).hex());
      trace.min_subgoals = min_n;
      trace.stagnation = stagnation;
      result_.rounds.push_back(std::move(trace));
    }
    return finish();
  }

 private:
  bool out_of_time() {
    if (deps_.cancel != nullptr && deps_.cancel->load()) result_.timed_out = true;
    if (seconds_since(t0_) >= cfg_.budget_s) result_.timed_out = true;
    return result_.timed_out;
  }

  bool refute_prunes(const BeamEntry& entry, int round) {
    if (!cfg_.refute || !should_refute(goal_, entry.state_hint, round, cfg_.refute_interval)) {
      return false;
    }
    ++result_.refute_calls;
    const std::string target = first_subgoal(entry.state_hint).value_or(goal_);
    return deps_.verifier->refute(target, cfg_.step_timeout).has_value();
  }

  // Returns true when a finisher closed the proof.
  bool expand(const BeamEntry& entry, int round, int stagnation, std::vector<BeamEntry>& successes) {
    RetrievalResult retrieved;
    if (deps_.premises != nullptr && deps_.premises->finalized()) {
      const auto pool = deps_.premises->select(retrieval_query(goal_, entry.state_hint),
                                               cfg_.premise_k_select, cfg_.premise_backend);
      retrieved = rerank(goal_, pool, cfg_.premise_k_rerank, deps_.premise_scorer);
    }
    ProposalContext ctx;
    ctx.goal = goal_;
    ctx.accepted_steps = entry.steps();
    ctx.state_hint = entry.state_hint;
    ctx.stagnation = stagnation;
    ctx.depth = round - 1;
    for (std::size_t i = 0; i < retrieved.ranked.size() && i < cfg_.helpful_facts; ++i) {
      ctx.helpful_facts.push_back(retrieved.ranked[i].id);
    }
    if (entry.subgoals <= cfg_.finish_trigger || entry.subgoals == kUnknownSubgoals) {
      auto cands = propose(*deps_.proposer, ctx, CheckMode::kFinish, cfg_.candidates);
      if (entry.subgoals == 0 && std::find(cands.begin(), cands.end(), "done") == cands.end()) {
        cands.insert(cands.begin(), "done");
      }
      for (const auto& c : rank(cands, entry, retrieved, CheckMode::kFinish)) {
        if (out_of_time()) return false;
        const CheckResult r = check(entry, c, CheckMode::kFinish, retrieved);
        if (r.success) {
          std::vector<std::string> lines = entry.lines;
          lines.push_back(c.command);
          solved_ = ProofScript(std::move(lines));
          return true;
        }
      }
    }
    const auto cands = propose(*deps_.proposer, ctx, CheckMode::kStep, cfg_.candidates);
    for (const auto& c : rank(cands, entry, retrieved, CheckMode::kStep)) {
      if (out_of_time()) return false;
      const CheckResult r = check(entry, c, CheckMode::kStep, retrieved);
      if (!r.success) continue;
      BeamEntry next;
      next.lines = entry.lines;
      next.lines.push_back(c.command);
      next.score = c.key;
      next.state_hint = r.state_hint;
      next.subgoals = r.subgoals.value_or(kUnknownSubgoals);
      successes.push_back(std::move(next));
    }
    return false;
  }

  std::vector<RankedCandidate> rank(const std::vector<std::string>& cands, const BeamEntry& entry,
                                    const RetrievalResult& retrieved, CheckMode mode) {
    std::vector<FeatureVector> features;
    features.reserve(cands.size());
    for (const auto& c : cands) {
      FeatureContext fc = feature_context(entry);
      fc.cache_hit = cached(cache_, entry.lines, c, mode);
      features.push_back(featurize(fc, c, premise_stats(retrieved, c)));
    }
    return order_featurized(cands, std::move(features), deps_.reranker, cfg_.lambda);
  }

  FeatureContext feature_context(const BeamEntry& entry) const {
    FeatureContext fc;
    fc.depth = static_cast<int>(entry.length()) - 1;
    if (entry.subgoals != kUnknownSubgoals) fc.subgoals = entry.subgoals;
    fc.elapsed_s = seconds_since(t0_);
    fc.goal = goal_;
    fc.state_hint = entry.state_hint;
    return fc;
  }

  CheckResult check(const BeamEntry& entry, const RankedCandidate& c, CheckMode mode,
                    const RetrievalResult& retrieved) {
    ++result_.verifier_calls;
    const CheckResult r = restart_on_crash(*deps_.verifier, entry.lines.size(), [&] {
      return deps_.verifier->check_step(cache_, entry.lines, c.command, mode, cfg_.step_timeout);
    });
    if (deps_.logger != nullptr) {
      AttemptRecord a;
      a.type = mode == CheckMode::kStep ? attempt_type::kStep : attempt_type::kFinisher;
      a.goal = goal_;
      a.prefix_fp = prefix_fp(entry.lines);
      a.action = c.command;
      a.success = r.success;
      if (entry.subgoals != kUnknownSubgoals) a.subgoals_before = entry.subgoals;
      a.subgoals_after = r.subgoals;
      if (mode == CheckMode::kFinish && r.success) a.subgoals_after = 0;
      a.elapsed_ms = r.elapsed_ms;
      a.cache_hit = r.cache_hit;
      a.depth = static_cast<int>(entry.length()) - 1;
      a.features = c.features;
      a.pool = retrieved.ids();
      a.order_key = c.key;
      if (deps_.reranker != nullptr) a.reranker_score = c.reranker_score;
      a.result_fp = with_step_fp(entry.lines, c.command);
      if (deps_.decorate) deps_.decorate(a);
      deps_.logger->attempt(std::move(a));
    }
    return r;
  }

  ProofResult finish() {
    result_.elapsed_s = seconds_since(t0_);
    if (solved_) {
      result_.solved = true;
      result_.best_steps = solved_->body();
      result_.best_subgoals = 0;
      result_.script = std::move(solved_);
    } else {
      result_.best_steps = best_.steps();
      result_.best_subgoals = best_.subgoals;
    }
    return std::move(result_);
  }

  std::string goal_;
  const SearchConfig& cfg_;
  SearchDeps& deps_;
  Clock::time_point t0_;
  StepCache cache_;
  ProofResult result_;
  BeamEntry best_;
  std::optional<ProofScript> solved_;
};

}  // namespace

ProofResult prove(std::string_view goal, const SearchConfig& cfg, SearchDeps& deps) {
  if (text::trim(goal).empty()) throw std::invalid_argument("prove: empty goal");
  if (deps.verifier == nullptr || deps.proposer == nullptr) {
    throw std::invalid_argument("prove: verifier and proposer are required");
  }
  cfg.validate();
  return Search(goal, cfg, deps).run();
}

// --- minimise and to_isar ----------------------------------------------------

namespace {

class Minimiser {
 public:
  Minimiser(Verifier& v, const MinimiseOptions& opts) : v_(v), opts_(opts), t0_(Clock::now()) {}

  bool budget_left() const { return seconds_since(t0_) < opts_.budget_s; }

  bool verifies(const ProofScript& s) {
    const CheckResult r = restart_on_crash(v_, s.size(), [&] { return v_.verify_full(s); });
    if (opts_.logger != nullptr) {
      AttemptRecord a;
      a.type = attempt_type::kMinimise;
      a.goal = opts_.goal.empty() ? s.goal() : opts_.goal;
      a.prefix_fp = prefix_fp({s.line(s.header_line())});
      a.action = text::join_lines(s.body());
      a.success = r.success;
      a.subgoals_after = r.subgoals;
      a.elapsed_ms = r.elapsed_ms;
      a.cache_hit = r.cache_hit;
      a.depth = static_cast<int>(s.body().size());
      a.result_fp = prefix_fp(s.lines());
      opts_.logger->attempt(std::move(a));
    }
    return r.success;
  }

 private:
  Verifier& v_;
  const MinimiseOptions& opts_;
  Clock::time_point t0_;
};

std::vector<std::string> header_lines(const ProofScript& s) {
  return {s.lines().begin(), s.lines().begin() + static_cast<std::ptrdiff_t>(s.header_line()) + 1};
}

std::optional<ProofScript> try_one_liners(const ProofScript& s, Minimiser& m) {
  if (s.body().size() <= 1) return std::nullopt;
  for (const char* cmd : {"by simp", "by auto", "by blast"}) {
    if (!m.budget_left()) return std::nullopt;
    auto lines = header_lines(s);
    lines.emplace_back(cmd);
    ProofScript cand(std::move(lines));
    if (m.verifies(cand)) return cand;
  }
  return std::nullopt;
}

// `by (simp add: a b)` / `by (metis a b)`: method, facts, indent.
struct FactCall {
  std::string indent;
  std::string head;    // "by" or "apply"
  std::string method;  // "simp add:" or "metis"
  std::vector<std::string> facts;

  std::string render(const std::vector<std::string>& fs) const {
    if (fs.empty()) {
      const std::string bare = method == "metis" ? "metis" : method.substr(0, method.find(' '));
      return indent + head + " " + bare;
    }
    std::string out = indent + head + " (" + method;
    for (const auto& f : fs) out += " " + f;
    return out + ")";
  }
};

std::optional<FactCall> parse_fact_call(const std::string& line) {
  static const std::regex kCall(R"(^(\s*)(by|apply)\s+\((simp|auto|fastforce|force)\s+add:\s*([^()]*)\)\s*$)");
  static const std::regex kMetis(R"(^(\s*)(by|apply)\s+\(metis\s+([^()]*)\)\s*$)");
  std::smatch m;
  FactCall c;
  std::string facts;
  if (std::regex_match(line, m, kCall)) {
    c = {m[1].str(), m[2].str(), m[3].str() + " add:", {}};
    facts = m[4].str();
  } else if (std::regex_match(line, m, kMetis)) {
    c = {m[1].str(), m[2].str(), "metis", {}};
    facts = m[3].str();
  } else {
    return std::nullopt;
  }
  std::istringstream in(facts);
  for (std::string f; in >> f;) c.facts.push_back(f);
  if (c.facts.empty()) return std::nullopt;
  return c;
}

}  // namespace

ProofScript minimise(const ProofScript& script, Verifier& verifier, const MinimiseOptions& opts) {
  Minimiser m(verifier, opts);
  ProofScript best = script;
  if (auto one = try_one_liners(best, m)) return *one;
  // Drop unused facts.
  for (std::size_t i = best.header_line() + 1; i < best.size() && m.budget_left(); ++i) {
    auto call = parse_fact_call(best.line(i));
    if (!call) continue;
    std::vector<std::string> kept = call->facts;
    for (std::size_t j = 0; j < kept.size() && m.budget_left();) {
      std::vector<std::string> trial_facts = kept;
      trial_facts.erase(trial_facts.begin() + static_cast<std::ptrdiff_t>(j));
      auto lines = best.lines();
      lines[i] = call->render(trial_facts);
      ProofScript cand(std::move(lines));
      if (m.verifies(cand)) {
        kept = std::move(trial_facts);
        best = std::move(cand);
      } else {
        ++j;
      }
    }
  }
  // Delete intermediate apply steps.
  for (std::size_t i = best.header_line() + 1; i < best.size() && m.budget_left();) {
    if (!text::trim(best.line(i)).starts_with("apply")) {
      ++i;
      continue;
    }
    auto lines = best.lines();
    lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(i));
    ProofScript cand(std::move(lines));
    if (m.verifies(cand)) {
      best = std::move(cand);
    } else {
      ++i;
    }
  }
  if (auto one = try_one_liners(best, m)) return *one;
  return best;
}

ProofScript to_isar(const ProofScript& script, Verifier& verifier) {
  const auto body = script.body();
  if (body.size() != 1 || text::first_word(text::trim(body[0])) != "by") return script;
  auto lines = header_lines(script);
  lines.emplace_back("proof -");
  lines.push_back("  show ?thesis " + std::string(text::trim(body[0])));
  lines.emplace_back("qed");
  ProofScript cand(std::move(lines));
  return verifier.verify_full(cand).success ? cand : script;
}

}  // namespace proofbeam
