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

#include "proofbeam/planner.h"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

#include "proofbeam/error.h"
#include "proofbeam/fingerprint.h"
#include "proofbeam/text.h"

namespace proofbeam {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::string_view kOutlineSystem =
    "You are an Isabelle/HOL proof assistant. Write a structured Isar proof outline for the "
    "lemma. Use `sorry` for every step you cannot justify. Output the proof only: no prose, "
    "no code fences.";

constexpr std::string_view kRepairSystem =
    "You are an Isabelle/HOL proof assistant. Rewrite the block under BLOCK so that it "
    "checks, keeping its role in the surrounding proof. Output the replacement block only: "
    "no prose, no code fences. Do not repeat any block listed under BANNED.";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fp_of(const ProofScript& s) { return state_fingerprint(s.render()).hex(); }

std::set<std::string> hole_ids(const ProofScript& s) {
  std::set<std::string> out;
  for (const Hole& h : find_holes(s)) out.insert(hole_id(s, h).hex());
  return out;
}

std::vector<Hole> new_holes(const ProofScript& before, const ProofScript& after) {
  const auto old = hole_ids(before);
  std::vector<Hole> out;
  for (const Hole& h : find_holes(after)) {
    if (!old.count(hole_id(after, h).hex())) out.push_back(h);
  }
  return out;
}

std::size_t holes_in(const ProofScript& s, LineRange span) {
  std::size_t n = 0;
  for (const Hole& h : find_holes(s)) n += span.contains(h.start_line) ? 1 : 0;
  return n;
}

// Lines of `body` with a leading declaration dropped.
std::string without_header(const std::string& body) {
  auto lines = text::split_lines(body);
  auto it = std::find_if(lines.begin(), lines.end(),
                         [](const std::string& l) { return !text::trim(l).empty(); });
  if (it != lines.end() && declaration_goal(text::trim(*it))) lines.erase(lines.begin(), it + 1);
  return text::join_lines(lines);
}

int accounting_stage(int stage) { return std::max(1, stage); }

}  // namespace

std::string_view to_string(PlannerMode mode) {
  return mode == PlannerMode::kOutline ? "outline" : "auto";
}

PlannerMode parse_planner_mode(std::string_view name) {
  if (name == "outline") return PlannerMode::kOutline;
  if (name == "auto") return PlannerMode::kAuto;
  throw std::invalid_argument("unknown planner mode: " + std::string(name));
}

std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kVerified: return "verified";
    case OutcomeKind::kPartial: return "partial";
    case OutcomeKind::kNoChange: return "no_change";
  }
  return "no_change";
}

// --- config ------------------------------------------------------------------

json PlannerConfig::to_json() const {
  return json{{"mode", std::string(to_string(mode))},
              {"samples_per_temp", samples_per_temp},
              {"temperatures", temperatures},
              {"enforce_holes", enforce_holes},
              {"alpha", weights.alpha},
              {"beta", weights.beta},
              {"gamma", weights.gamma},
              {"c1", c1},
              {"c2", c2},
              {"fill_beam", fill_beam},
              {"fill_depth", fill_depth},
              {"fill_budget_s", fill_budget_s},
              {"repair_budget_s", repair_budget_s},
              {"repair_candidates", repair_candidates},
              {"repair_proposals", repair_proposals},
              {"budget_s", budget_s},
              {"k_ctx", k_ctx},
              {"k_lex", k_lex},
              {"k_hint", k_hint},
              {"ban_max", ban_max},
              {"regeneration_cap", regeneration_cap},
              {"stall_limit", stall_limit},
              {"anchor_window", anchor_window},
              {"check_timeout_ms", check_timeout.count()}};
}

PlannerConfig PlannerConfig::from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("planner config must be an object");
  PlannerConfig c;
  try {
    if (j.contains("mode")) c.mode = parse_planner_mode(j["mode"].get<std::string>());
    c.samples_per_temp = j.value("samples_per_temp", c.samples_per_temp);
    c.temperatures = j.value("temperatures", c.temperatures);
    c.enforce_holes = j.value("enforce_holes", c.enforce_holes);
    c.weights.alpha = j.value("alpha", c.weights.alpha);
    c.weights.beta = j.value("beta", c.weights.beta);
    c.weights.gamma = j.value("gamma", c.weights.gamma);
    c.c1 = j.value("c1", c.c1);
    c.c2 = j.value("c2", c.c2);
    c.fill_beam = j.value("fill_beam", c.fill_beam);
    c.fill_depth = j.value("fill_depth", c.fill_depth);
    c.fill_budget_s = j.value("fill_budget_s", c.fill_budget_s);
    c.repair_budget_s = j.value("repair_budget_s", c.repair_budget_s);
    c.repair_candidates = j.value("repair_candidates", c.repair_candidates);
    c.repair_proposals = j.value("repair_proposals", c.repair_proposals);
    c.budget_s = j.value("budget_s", c.budget_s);
    c.k_ctx = j.value("k_ctx", c.k_ctx);
    c.k_lex = j.value("k_lex", c.k_lex);
    c.k_hint = j.value("k_hint", c.k_hint);
    c.ban_max = j.value("ban_max", c.ban_max);
    c.regeneration_cap = j.value("regeneration_cap", c.regeneration_cap);
    c.stall_limit = j.value("stall_limit", c.stall_limit);
    c.anchor_window = j.value("anchor_window", c.anchor_window);
    c.check_timeout = Millis(j.value("check_timeout_ms", c.check_timeout.count()));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad planner config: ") + e.what());
  }
  return c;
}

void PlannerConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("planner config: ") + what);
  };
  require(c1 >= 1 && c2 >= 1, "c1 and c2 must be >= 1");
  require(!temperatures.empty(), "temperatures must be non-empty");
  require(samples_per_temp >= 1, "samples_per_temp must be >= 1");
  require(fill_budget_s > 0 && repair_budget_s > 0, "fill and repair budgets must be > 0");
  require(budget_s >= 0, "budget_s must be >= 0");
  require(fill_beam >= 1 && fill_depth >= 1, "fill beam and depth must be >= 1");
  require(repair_candidates >= 1 && repair_proposals >= 1, "repair caps must be >= 1");
  require(ban_max >= 1, "ban_max must be >= 1");
  require(regeneration_cap >= 0, "regeneration_cap must be >= 0");
  require(stall_limit >= 1, "stall_limit must be >= 1");
  require(k_ctx >= 0 && k_lex >= 0 && k_hint >= 0, "hint caps must be >= 0");
  require(check_timeout.count() > 0, "check timeout must be > 0");
}

// --- state -------------------------------------------------------------------

int PlannerState::stage_of(const std::string& hid) const {
  auto it = stage.find(hid);
  return it == stage.end() ? 0 : it->second;
}

int PlannerState::tries_of(const std::string& hid, int s) const {
  auto it = tries.find({hid, s});
  return it == tries.end() ? 0 : it->second;
}

bool PlannerState::banned(const std::string& hid, BlockKind kind, const std::string& fp) const {
  auto it = bans.find({hid, std::string(block_kind_name(kind))});
  return it != bans.end() && std::find(it->second.begin(), it->second.end(), fp) != it->second.end();
}

void PlannerState::ban(const std::string& hid, BlockKind kind, const std::string& fp,
                       std::size_t max) {
  auto& list = bans[{hid, std::string(block_kind_name(kind))}];
  if (std::find(list.begin(), list.end(), fp) != list.end()) return;
  list.push_back(fp);
  while (list.size() > max) list.pop_front();
}

std::size_t PlannerState::ban_size(const std::string& hid, BlockKind kind) const {
  auto it = bans.find({hid, std::string(block_kind_name(kind))});
  return it == bans.end() ? 0 : it->second.size();
}

void escalate(PlannerState& state, const std::string& hid, const PlannerConfig& cfg) {
  const int s = state.stage_of(hid);
  if (s <= 1 && state.tries_of(hid, 1) >= cfg.c1) {
    state.stage[hid] = 2;
  } else if (s == 2 && state.tries_of(hid, 2) >= cfg.c2) {
    state.regenerate = true;
  }
}

void record_failure(PlannerState& state, const std::string& hid, const PlannerConfig& cfg) {
  const int s = accounting_stage(state.stage_of(hid));
  ++state.tries[{hid, s}];
  if (state.stage_of(hid) == 0) state.stage[hid] = 1;
  escalate(state, hid, cfg);
}

std::optional<std::size_t> nearest_hole(const ProofScript& /*script*/,
                                        const std::vector<Hole>& candidates,
                                        std::size_t previous_line) {
  std::optional<std::size_t> best;
  std::size_t best_d = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::size_t l = candidates[i].start_line;
    const std::size_t d = l > previous_line ? l - previous_line : previous_line - l;
    if (!best || d < best_d ||
        (d == best_d && l < candidates[*best].start_line)) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

std::optional<std::string> select_focus(const ProofScript& script, std::size_t previous_line) {
  const auto holes = find_holes(script);
  const auto i = nearest_hole(script, holes, previous_line);
  if (!i) return std::nullopt;
  return hole_id(script, holes[*i]).hex();
}

// --- helpers -----------------------------------------------------------------

std::string normalize_error_message(std::string_view message) {
  static const std::regex kTimestamp(
      R"(\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?)");
  static const std::regex kClock(R"(\b\d{1,2}:\d{2}:\d{2}(\.\d+)?\b)");
  static const std::regex kSession(R"(\(?\bin session\s+"?[A-Za-z0-9_.\-]+"?\)?)");
  static const std::regex kPath(R"((/[^\s/:"'()]+)+/([^\s/:"'()]+))");
  std::string s(message);
  s = std::regex_replace(s, kTimestamp, "");
  s = std::regex_replace(s, kClock, "");
  s = std::regex_replace(s, kSession, "");
  s = std::regex_replace(s, kPath, "$2");
  return text::collapse_whitespace(s);
}

std::vector<std::string> format_counterexample(const CounterexampleReport& report) {
  std::vector<std::string> out;
  for (const auto& [var, value] : report.bindings) {
    out.push_back("COUNTEREXAMPLE: " + var + " = " + value);
  }
  return out;
}

// --- Planner -----------------------------------------------------------------

Planner::Planner(std::string goal, PlannerConfig cfg, PlannerDeps deps)
    : goal_(std::move(goal)), cfg_(std::move(cfg)), deps_(deps), t0_(Clock::now()) {
  if (text::trim(goal_).empty()) throw std::invalid_argument("planner: empty goal");
  if (deps_.verifier == nullptr || deps_.proposer == nullptr) {
    throw std::invalid_argument("planner: verifier and proposer are required");
  }
  if (deps_.step_proposer == nullptr) deps_.step_proposer = deps_.proposer;
  cfg_.validate();
}

bool Planner::out_of_time() const {
  if (deps_.cancel != nullptr && deps_.cancel->load()) return true;
  return seconds_since(t0_) >= cfg_.budget_s;
}

double Planner::remaining_s() const { return cfg_.budget_s - seconds_since(t0_); }

void Planner::stamp(AttemptRecord& a) const {
  if (a.goal.empty()) a.goal = goal_;
  if (!a.stage && stage_) a.stage = stage_;
  if (!a.hid && hid_) a.hid = hid_;
  a.extra["generation"] = generation_;
  if (try_ > 0) a.extra["try"] = try_;
}

void Planner::log(AttemptRecord a) {
  if (deps_.logger == nullptr) return;
  stamp(a);
  deps_.logger->attempt(std::move(a));
}

CheckResult Planner::check(const ProofScript& script, bool full, AttemptRecord a) {
  Verifier& v = *deps_.verifier;
  const CheckResult r = restart_on_crash(v, script.size(), [&] {
    return full ? v.verify_full(script, cfg_.check_timeout)
                : v.check_script(script, cfg_.check_timeout);
  });
  a.prefix_fp = fp_of(script);
  if (a.action.empty()) a.action = script.render();
  a.success = a.success && r.success;
  a.subgoals_after = r.subgoals;
  a.elapsed_ms = r.elapsed_ms;
  a.cache_hit = r.cache_hit;
  log(std::move(a));
  return r;
}

CheckResult Planner::probe(const std::vector<std::string>& prefix, AttemptRecord a) {
  Verifier& v = *deps_.verifier;
  const CheckResult r =
      restart_on_crash(v, prefix.size(), [&] { return v.probe(prefix, cfg_.check_timeout); });
  a.type = attempt_type::kProbe;
  a.prefix_fp = state_fingerprint(text::join_lines(prefix)).hex();
  a.action = "print_state";
  a.success = r.success;
  a.subgoals_after = r.subgoals;
  a.elapsed_ms = r.elapsed_ms;
  a.result_fp = state_fingerprint(r.state_hint).hex();
  log(std::move(a));
  return r;
}

HintSet Planner::gather_hints() {
  std::vector<std::string> ctx;
  if (cfg_.k_ctx > 0) {
    const CheckResult r = probe({make_header(goal_)}, {});
    if (r.success) ctx = normalize_facts(state_fact_names(r.state_hint), cfg_.k_ctx);
  }
  std::vector<std::string> lex;
  if (deps_.lexicon != nullptr && cfg_.k_lex > 0) lex = lexicon_hints(*deps_.lexicon, goal_, cfg_.k_lex);
  return combine_hints(ctx, lex, cfg_.k_hint);
}

std::vector<ProofScript> Planner::sample_outlines(const HintSet& hints) {
  std::ostringstream user;
  user << kGoalSection << '\n' << goal_ << '\n';
  if (!hints.empty()) user << hints_line(hints.ids) << '\n';
  std::vector<ProofScript> out;
  std::set<std::string> seen;
  for (double t : cfg_.temperatures) {
    for (int j = 0; j < cfg_.samples_per_temp; ++j) {
      if (out_of_time()) return out;
      ++stats_.outlines_sampled;
      const std::string raw = deps_.proposer->complete(std::string(kOutlineSystem), user.str(), t, 1);
      try {
        ProofScript s = split_sorry_lines(normalize_outline(raw, goal_, cfg_.enforce_holes));
        if (seen.insert(fp_of(s)).second) out.push_back(std::move(s));
      } catch (const Error&) {
        // Unsalvageable sample.
      }
    }
  }
  return out;
}

ScoredOutline Planner::score_outline(const ProofScript& outline, const HintSet& hints) {
  AttemptRecord a;
  a.type = outline_type_;
  a.success = true;
  if (outline_type_ == std::string_view(attempt_type::kRegeneration)) a.stage = 3;
  const CheckResult r = check(outline, false, std::move(a));
  ScoredOutline s{outline, 0.0, r.success, static_cast<int>(find_holes(outline).size()),
                  hint_bonus(outline, hints, cfg_.k_hint)};
  s.score = cfg_.weights.alpha * (s.clean ? 1 : 0) - cfg_.weights.beta * s.holes +
            cfg_.weights.gamma * s.bonus;
  return s;
}

std::vector<ScoredOutline> Planner::rank_outlines(const std::vector<ProofScript>& outlines,
                                                  const HintSet& hints) {
  std::vector<ScoredOutline> out;
  for (const auto& o : outlines) {
    if (out_of_time()) break;
    out.push_back(score_outline(o, hints));
  }
  std::stable_sort(out.begin(), out.end(), [](const ScoredOutline& a, const ScoredOutline& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.script.size() < b.script.size();
  });
  return out;
}

std::vector<ScoredOutline> Planner::sample_and_rank(const HintSet& hints) {
  return rank_outlines(sample_outlines(hints), hints);
}

std::string Planner::effective_goal(const ProofScript& script, const Hole& hole) {
  std::vector<std::string> prefix(script.lines().begin(),
                                  script.lines().begin() + static_cast<std::ptrdiff_t>(hole.start_line));
  const std::string& line = script.line(hole.start_line);
  const std::string before = text::trim(line.substr(0, line.find("sorry"))).empty()
                                 ? std::string()
                                 : line.substr(0, line.find("sorry"));
  if (!before.empty()) prefix.push_back(before);
  if (prefix.empty()) return goal_;
  const CheckResult r = probe(prefix, {});
  if (!r.success) return goal_;
  return first_subgoal(r.state_hint).value_or(goal_);
}

std::size_t Planner::earliest_failure_line(const ProofScript& script, const Hole& hole) {
  AttemptRecord a;
  a.type = attempt_type::kProbe;
  a.success = true;
  const CheckResult r = check(script, false, std::move(a));
  std::size_t best = hole.start_line;
  for (const LineError& e : r.errors) best = std::min(best, e.line);
  return std::clamp<std::size_t>(best, std::min<std::size_t>(1, hole.start_line), hole.start_line);
}

std::vector<std::string> Planner::counterexample_hints(std::string_view state) {
  const std::string target = first_subgoal(state).value_or(std::string(state));
  const auto report = deps_.verifier->refute(target, cfg_.check_timeout);
  if (!report) return {};
  return format_counterexample(*report);
}

std::optional<ProofScript> Planner::normalize(const ProofScript& script) {
  ProofScript s = split_sorry_lines(script);
  for (int round = 0; round < 16; ++round) {
    AttemptRecord a;
    a.type = attempt_type::kNormalize;
    a.success = true;
    const CheckResult r = check(s, false, std::move(a));
    if (r.success) return s;
    std::vector<std::size_t> failing;
    for (const LineError& e : r.errors) failing.push_back(std::min(e.line, s.size()));
    try {
      OpenedScript opened = open_minimal_sorries(s, failing);
      ProofScript next = split_sorry_lines(opened.script);
      if (fp_of(next) == fp_of(s)) return std::nullopt;
      s = std::move(next);
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

Outcome Planner::fill_hole(const ProofScript& script, std::size_t hole_index,
                           PlannerState& state) {
  Outcome out;
  const ProofScript s = split_sorry_lines(script);
  const auto holes = find_holes(s);
  if (hole_index >= holes.size() || out_of_time()) return out;
  const Hole hole = holes[hole_index];
  const std::string hid = hole_id(s, hole).hex();
  hid_ = hid;
  stage_ = accounting_stage(state.stage_of(hid));
  try_ = state.tries_of(hid, *stage_) + 1;

  const std::string eff = effective_goal(s, hole);
  SearchConfig sc;
  sc.beam_width = cfg_.fill_beam;
  sc.max_depth = cfg_.fill_depth;
  sc.budget_s = std::min(cfg_.fill_budget_s, remaining_s());
  sc.step_timeout = cfg_.check_timeout;
  if (sc.budget_s <= 0) return out;
  SearchDeps sd;
  sd.verifier = deps_.verifier;
  sd.proposer = deps_.step_proposer;
  sd.reranker = deps_.reranker;
  sd.premises = deps_.premises;
  sd.global_cache = deps_.global_cache;
  sd.logger = deps_.logger;
  sd.cancel = deps_.cancel;
  sd.decorate = [this](AttemptRecord& a) { stamp(a); };
  ++stats_.fills_attempted;
  const ProofResult pr = prove(eff, sc, sd);
  const std::vector<std::string> steps = pr.solved ? pr.script->body() : pr.best_steps;
  if (steps.empty()) return out;

  std::vector<std::string> block;
  if (pr.solved) {
    for (const auto& l : steps) block.emplace_back(text::trim(l));
  } else if (is_apply_legal(s, hole)) {
    for (const auto& l : steps) block.emplace_back(text::trim(l));
    block.emplace_back("sorry");
  } else {
    block = {"proof -", "  show ?thesis"};
    for (const auto& l : steps) block.push_back("    " + std::string(text::trim(l)));
    block.emplace_back("    sorry");
    block.emplace_back("qed");
  }
  const ProofScript next = replace_span(s, hole.lines(), text::join_lines(block));
  const bool hole_free = find_holes(next).empty();
  AttemptRecord a;
  a.type = attempt_type::kFill;
  a.action = text::join_lines(block);
  a.effective_goal = eff;
  a.success = pr.solved;
  a.candidate_fp = state_fingerprint(a.action).hex();
  const CheckResult r = check(next, pr.solved && hole_free, std::move(a));
  if (r.success && pr.solved) {
    out.kind = OutcomeKind::kVerified;
    out.script = next;
    return out;
  }
  std::optional<ProofScript> kept = r.success ? std::optional<ProofScript>(next) : normalize(next);
  if (!kept || fp_of(*kept) == fp_of(s)) return out;
  out.kind = OutcomeKind::kPartial;
  out.opened = new_holes(s, *kept);
  out.script = std::move(kept);
  out.tag = "fill partial-progress";
  return out;
}

BlockSpan Planner::repair_block(const ProofScript& script, const Hole& hole, int stage,
                                std::size_t focus) const {
  std::vector<BlockKind> kinds = stage >= 2
                                     ? std::vector<BlockKind>{BlockKind::kCaseBlock, BlockKind::kSubproof}
                                     : std::vector<BlockKind>{BlockKind::kHaveShow};
  for (BlockKind kind : kinds) {
    if (auto b = enclosing_block(script, focus, kind); b && b->lines().contains(hole.start_line)) {
      return *b;
    }
    if (auto b = enclosing_block(script, hole.start_line, kind)) return *b;
  }
  return BlockSpan{BlockKind::kWhole, script.header_line() + 1, script.size()};
}

std::string Planner::repair_prompt(const ProofScript& script, const BlockSpan& block,
                                   const std::string& eff_goal,
                                   const std::vector<LineError>& errors,
                                   const std::vector<std::string>& counterexamples,
                                   const std::deque<std::string>& banned,
                                   std::size_t focus) const {
  std::ostringstream u;
  u << kGoalSection << '\n' << eff_goal << '\n';
  u << "KIND: " << block_kind_name(block.kind) << '\n';
  u << "ERRORS:\n";
  if (errors.empty()) u << "(none)\n";
  for (const LineError& e : errors) {
    u << "line " << e.line << ": " << normalize_error_message(e.message) << '\n';
  }
  const std::size_t lo = std::min(focus, block.start_line) > 3 ? std::min(focus, block.start_line) - 3 : 0;
  const std::size_t hi = std::min(script.size(), block.end_line + 3);
  u << "CONTEXT:\n";
  for (std::size_t i = lo; i < hi; ++i) u << script.line(i) << '\n';
  u << "BLOCK:\n";
  for (std::size_t i = block.start_line; i < block.end_line; ++i) u << script.line(i) << '\n';
  u << "COUNTEREXAMPLES:\n";
  if (counterexamples.empty()) u << "(none)\n";
  for (const auto& c : counterexamples) u << c << '\n';
  u << "BANNED:\n";
  if (banned.empty()) u << "(none)\n";
  for (const auto& fp : banned) {
    auto it = banned_text_.find(fp);
    u << (it == banned_text_.end() ? fp : it->second) << "\n---\n";
  }
  return u.str();
}

Outcome Planner::cegis_repair(const ProofScript& script, std::size_t hole_index,
                              PlannerState& state, double budget_s) {
  Outcome out;
  const ProofScript s = split_sorry_lines(script);
  const auto holes = find_holes(s);
  if (hole_index >= holes.size() || budget_s <= 0 || out_of_time()) return out;
  const auto t_start = Clock::now();
  const Hole hole = holes[hole_index];
  const std::string hid = hole_id(s, hole).hex();
  const int stage = accounting_stage(state.stage_of(hid));
  hid_ = hid;
  stage_ = stage;
  try_ = state.tries_of(hid, stage) + 1;

  const std::size_t anchor = earliest_failure_line(s, hole);
  const std::size_t floor =
      hole.start_line > cfg_.anchor_window ? hole.start_line - cfg_.anchor_window : 1;
  const std::size_t focus = std::max(anchor, std::min(floor, hole.start_line));
  const BlockSpan block = repair_block(s, hole, stage, focus);
  const std::string kind_name(block_kind_name(block.kind));
  const std::string eff = effective_goal(s, hole);
  const std::vector<std::string> ce = counterexample_hints(eff);
  std::vector<LineError> errors;
  const std::size_t holes_outside = find_holes(s).size() - holes_in(s, block.lines());

  std::optional<ProofScript> partial;
  int checks = 0;
  for (int proposals = 0; proposals < cfg_.repair_proposals && checks < cfg_.repair_candidates;
       ++proposals) {
    if (out_of_time() || seconds_since(t_start) >= budget_s) break;
    const double t = cfg_.temperatures[static_cast<std::size_t>(proposals) % cfg_.temperatures.size()];
    const auto& banned = state.bans[{hid, kind_name}];
    std::string raw;
    try {
      raw = deps_.proposer->complete(
          std::string(kRepairSystem),
          repair_prompt(s, block, eff, errors, ce, banned, focus), t, 1);
    } catch (const BackendUnavailable&) {
      break;
    }
    std::string candidate;
    try {
      candidate = strip_to_type(raw, block.kind);
      if (block.kind == BlockKind::kWhole) candidate = without_header(candidate);
    } catch (const Error&) {
      continue;
    }
    if (text::trim(candidate).empty()) continue;
    const std::string fp = state_fingerprint(candidate).hex();
    if (state.banned(hid, block.kind, fp)) {
      ++stats_.banned_skips;
      continue;
    }
    std::optional<ProofScript> next;
    try {
      next = replace_span(s, block.lines(), candidate);
      next = split_sorry_lines(*next);
    } catch (const Error&) {
      state.ban(hid, block.kind, fp, cfg_.ban_max);
      banned_text_[fp] = candidate;
      continue;
    }
    ++checks;
    ++stats_.repairs_attempted;
    if (deps_.on_repair_check) deps_.on_repair_check(hid, block.kind, fp);
    const bool hole_free = find_holes(*next).empty();
    const bool closes_block = find_holes(*next).size() == holes_outside;
    AttemptRecord a;
    a.type = attempt_type::kRepair;
    a.action = candidate;
    a.block_kind = kind_name;
    a.effective_goal = eff;
    a.counterexamples = ce;
    a.candidate_fp = fp;
    a.ban_size = static_cast<int>(state.ban_size(hid, block.kind));
    a.tag = "stage=" + std::to_string(stage);
    const CheckResult r = restart_on_crash(*deps_.verifier, next->size(), [&] {
      return hole_free ? deps_.verifier->verify_full(*next, cfg_.check_timeout)
                       : deps_.verifier->check_script(*next, cfg_.check_timeout);
    });
    const bool ok = r.success && closes_block;
    a.prefix_fp = fp_of(s);
    a.result_fp = fp_of(*next);
    a.success = ok;
    a.verdict = ok ? "verified" : "rejected";
    a.subgoals_after = r.subgoals;
    a.elapsed_ms = r.elapsed_ms;
    a.cache_hit = r.cache_hit;
    log(std::move(a));
    if (ok) {
      out.kind = OutcomeKind::kVerified;
      out.script = std::move(next);
      out.tag = "stage=" + std::to_string(stage) + " verified";
      return out;
    }
    errors = r.errors;
    state.ban(hid, block.kind, fp, cfg_.ban_max);
    banned_text_[fp] = candidate;
    if (out_of_time()) break;
    if (auto kept = normalize(*next); kept && fp_of(*kept) != fp_of(s)) {
      if (!partial || find_holes(*kept).size() < find_holes(*partial).size()) partial = kept;
    }
  }
  if (partial) {
    out.kind = OutcomeKind::kPartial;
    out.opened = new_holes(s, *partial);
    out.script = std::move(partial);
    out.tag = "stage=" + std::to_string(stage) + " partial-progress";
  }
  return out;
}

ProofScript Planner::workable(const std::vector<ScoredOutline>& ranked) {
  for (const ScoredOutline& o : ranked) {
    if (out_of_time()) break;
    if (o.clean) return o.script;
    if (auto s = normalize(o.script)) return *s;
  }
  return ProofScript({make_header(goal_), "  sorry"});
}

PlanResult Planner::plan_outline() {
  const HintSet hints = gather_hints();
  stats_.outlines = sample_and_rank(hints);
  if (stats_.outlines.empty()) {
    stats_.script = ProofScript({make_header(goal_), "  sorry"});
  } else {
    const ScoredOutline& best = stats_.outlines.front();
    stats_.script = best.script;
    stats_.solved = best.clean && best.holes == 0;
  }
  stats_.elapsed_s = seconds_since(t0_);
  stats_.timed_out = out_of_time();
  return stats_;
}

PlanResult Planner::plan_auto() {
  const HintSet hints = out_of_time() ? HintSet{} : gather_hints();
  ProofScript working = workable(sample_and_rank(hints));
  ProofScript best = working;
  PlannerState state;
  std::size_t previous_line = 0;
  // A bare `sorry` body never displaces a structured script.
  auto trivial = [](const ProofScript& s) { return s.size() <= 2; };
  auto better = [&](const ProofScript& a, const ProofScript& b) {
    if (trivial(a) != trivial(b)) return trivial(b);
    return find_holes(a).size() < find_holes(b).size();
  };
  int idle = 0;
  while (true) {
    if (out_of_time()) {
      stats_.timed_out = true;
      break;
    }
    ++stats_.iterations;
    stage_.reset();
    hid_.reset();
    try_ = 0;
    const auto holes = find_holes(working);
    if (holes.empty()) {
      AttemptRecord a;
      a.type = attempt_type::kOutline;
      a.success = true;
      if (check(working, true, std::move(a)).success) {
        stats_.solved = true;
        break;
      }
      auto fixed = normalize(working);
      if (!fixed || find_holes(*fixed).empty()) break;
      working = *fixed;
      continue;
    }
    std::size_t index = 0;
    bool focused = false;
    if (state.focus) {
      for (std::size_t i = 0; i < holes.size(); ++i) {
        if (hole_id(working, holes[i]).hex() == *state.focus) {
          index = i;
          focused = true;
          break;
        }
      }
    }
    if (!focused && previous_line > 0) {
      index = nearest_hole(working, holes, previous_line).value_or(0);
    }
    const Hole hole = holes[index];
    const std::string hid = hole_id(working, hole).hex();
    previous_line = hole.start_line;
    const int repairs_before = stats_.repairs_attempted;

    Outcome o;
    if (state.stage_of(hid) < 2) o = fill_hole(working, index, state);
    if (o.kind == OutcomeKind::kNoChange && !out_of_time()) {
      o = cegis_repair(working, index, state, std::min(cfg_.repair_budget_s, remaining_s()));
    }
    switch (o.kind) {
      case OutcomeKind::kVerified:
        working = *o.script;
        state.focus.reset();
        if (find_holes(working).empty()) {
          stats_.solved = true;
        } else if (auto f = select_focus(working, previous_line)) {
          state.focus = f;
        }
        break;
      case OutcomeKind::kPartial: {
        record_failure(state, hid, cfg_);
        working = *o.script;
        const auto pick = nearest_hole(working, o.opened, previous_line);
        state.focus = pick ? std::optional<std::string>(hole_id(working, o.opened[*pick]).hex())
                           : select_focus(working, previous_line);
        break;
      }
      case OutcomeKind::kNoChange:
        record_failure(state, hid, cfg_);
        state.focus = hid;
        break;
    }
    if (stats_.solved) break;
    if (better(working, best)) best = working;
    // Every proposal banned and nothing left to regenerate: stop spinning.
    const bool spent = stats_.regenerations >= cfg_.regeneration_cap && state.stage_of(hid) >= 2;
    const bool stuck = o.kind == OutcomeKind::kNoChange && stats_.repairs_attempted == repairs_before;
    idle = spent && stuck ? idle + 1 : 0;
    if (idle >= cfg_.stall_limit) {
      stats_.stalled = true;
      break;
    }
    if (deps_.on_iteration) deps_.on_iteration(working);
    if (state.regenerate) {
      state.regenerate = false;
      if (stats_.regenerations < cfg_.regeneration_cap && !out_of_time()) {
        ++stats_.regenerations;
        ++generation_;
        stage_ = 3;
        hid_.reset();
        try_ = 0;
        outline_type_ = attempt_type::kRegeneration;
        const auto ranked = sample_and_rank(hints);
        outline_type_ = attempt_type::kOutline;
        if (!ranked.empty()) {
          working = workable(ranked);
          state = PlannerState{};
          previous_line = 0;
          if (better(working, best)) best = working;
          if (deps_.on_iteration) deps_.on_iteration(working);
        }
        stage_.reset();
      }
    }
  }
  stats_.script = stats_.solved ? working : best;
  stats_.elapsed_s = seconds_since(t0_);
  return stats_;
}

PlanResult Planner::run() {
  return cfg_.mode == PlannerMode::kOutline ? plan_outline() : plan_auto();
}

PlanResult plan_auto(std::string_view goal, const PlannerConfig& cfg, PlannerDeps deps) {
  return Planner(std::string(goal), cfg, deps).plan_auto();
}

PlanResult plan_outline(std::string_view goal, const PlannerConfig& cfg, PlannerDeps deps) {
  return Planner(std::string(goal), cfg, deps).plan_outline();
}

}  // namespace proofbeam
