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

#ifndef PROOFBEAM_PLANNER_H_
#define PROOFBEAM_PLANNER_H_

#include <atomic>
#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "proofbeam/datalog.h"
#include "proofbeam/hints.h"
#include "proofbeam/premises.h"
#include "proofbeam/proposer.h"
#include "proofbeam/rerank.h"
#include "proofbeam/script.h"
#include "proofbeam/stepwise.h"
#include "proofbeam/verifier.h"

namespace proofbeam {

enum class PlannerMode { kOutline, kAuto };

std::string_view to_string(PlannerMode mode);
// Throws std::invalid_argument.
PlannerMode parse_planner_mode(std::string_view name);

struct ScoreWeights {
  double alpha = 10.0;  // clean gapped check
  double beta = 1.0;    // per hole
  double gamma = 1.0;   // hint bonus
};

struct PlannerConfig {
  PlannerMode mode = PlannerMode::kAuto;
  int samples_per_temp = 2;
  std::vector<double> temperatures = {0.3, 0.7, 1.0};
  bool enforce_holes = true;
  ScoreWeights weights;
  int c1 = 2;
  int c2 = 3;
  int fill_beam = 2;
  int fill_depth = 3;
  double fill_budget_s = 15.0;
  double repair_budget_s = 30.0;
  int repair_candidates = 4;  // verifier-checked blocks per repair call
  int repair_proposals = 8;   // proposer calls per repair call
  double budget_s = 300.0;
  int k_ctx = 8;
  int k_lex = 8;
  int k_hint = 12;
  std::size_t ban_max = 8;
  int regeneration_cap = 2;
  int stall_limit = 64;  // idle iterations tolerated once regeneration is spent
  std::size_t anchor_window = 20;
  Millis check_timeout{30'000};

  nlohmann::json to_json() const;
  // Missing keys keep their defaults. Throws std::invalid_argument.
  static PlannerConfig from_json(const nlohmann::json& j);
  // Throws std::invalid_argument when an invariant does not hold.
  void validate() const;
};

struct PlannerState {
  std::map<std::string, int> stage;                    // hid -> 0, 1, 2
  std::map<std::pair<std::string, int>, int> tries;    // (hid, stage) -> failures
  std::optional<std::string> focus;
  std::map<std::pair<std::string, std::string>, std::deque<std::string>> bans;
  bool regenerate = false;

  int stage_of(const std::string& hid) const;
  int tries_of(const std::string& hid, int stage) const;
  bool banned(const std::string& hid, BlockKind kind, const std::string& fp) const;
  // Oldest entry dropped past `max`.
  void ban(const std::string& hid, BlockKind kind, const std::string& fp, std::size_t max);
  std::size_t ban_size(const std::string& hid, BlockKind kind) const;
};

// Raises the stage once a cap is reached; at stage 2 sets `regenerate`.
void escalate(PlannerState& state, const std::string& hid, const PlannerConfig& cfg);

// Counts a failed attempt on `hid` at its accounting stage (fresh holes count
// as stage 1), then escalates.
void record_failure(PlannerState& state, const std::string& hid, const PlannerConfig& cfg);

// Nearest hole to `previous_line`, earlier hole on ties.
std::optional<std::string> select_focus(const ProofScript& script, std::size_t previous_line);
std::optional<std::size_t> nearest_hole(const ProofScript& script,
                                        const std::vector<Hole>& candidates,
                                        std::size_t previous_line);

// Everything the planner talks to. `verifier` and `proposer` are required;
// `step_proposer` defaults to `proposer`.
struct PlannerDeps {
  Verifier* verifier = nullptr;
  ProposerBackend* proposer = nullptr;
  ProposerBackend* step_proposer = nullptr;
  const RerankModel* reranker = nullptr;
  const PremiseIndex* premises = nullptr;
  const HintLexicon* lexicon = nullptr;
  GlobalCache* global_cache = nullptr;
  RunLogger* logger = nullptr;
  const std::atomic<bool>* cancel = nullptr;
  // Called with the working script after every iteration that did not solve.
  std::function<void(const ProofScript&)> on_iteration;
  // Called for every block sent to the verifier by repair.
  std::function<void(const std::string& hid, BlockKind kind, const std::string& fp)>
      on_repair_check;
};

struct ScoredOutline {
  ProofScript script;
  double score = 0.0;
  bool clean = false;
  int holes = 0;
  int bonus = 0;
};

struct PlanResult {
  bool solved = false;
  std::optional<ProofScript> script;  // always set on return
  int outlines_sampled = 0;
  int fills_attempted = 0;
  int repairs_attempted = 0;
  int regenerations = 0;
  int banned_skips = 0;
  int iterations = 0;
  double elapsed_s = 0.0;
  bool timed_out = false;
  bool stalled = false;
  std::vector<ScoredOutline> outlines;  // ranked, outline mode only
};

enum class OutcomeKind { kVerified, kPartial, kNoChange };

std::string_view to_string(OutcomeKind kind);

struct Outcome {
  OutcomeKind kind = OutcomeKind::kNoChange;
  std::optional<ProofScript> script;
  std::vector<Hole> opened;
  std::string tag;
};

// Shared by the operations below; owns the per-run log context.
class Planner {
 public:
  Planner(std::string goal, PlannerConfig cfg, PlannerDeps deps);

  const std::string& goal() const { return goal_; }
  const PlannerConfig& config() const { return cfg_; }

  HintSet gather_hints();

  std::vector<ProofScript> sample_outlines(const HintSet& hints);

  // α·clean − β·holes + γ·hint_bonus.
  ScoredOutline score_outline(const ProofScript& outline, const HintSet& hints);

  // Ranked descending by score, then fewer lines, then sample order.
  std::vector<ScoredOutline> rank_outlines(const std::vector<ProofScript>& outlines,
                                           const HintSet& hints);

  std::string effective_goal(const ProofScript& script, const Hole& hole);

  std::size_t earliest_failure_line(const ProofScript& script, const Hole& hole);

  std::vector<std::string> counterexample_hints(std::string_view state);

  // Replaces failing lines with holes until the gapped check passes. Returns
  // nullopt when that cannot be reached.
  std::optional<ProofScript> normalize(const ProofScript& script);

  Outcome fill_hole(const ProofScript& script, std::size_t hole_index, PlannerState& state);

  Outcome cegis_repair(const ProofScript& script, std::size_t hole_index, PlannerState& state,
                       double budget_s);

  PlanResult plan_auto();
  PlanResult plan_outline();
  PlanResult run();

 private:
  // Every verifier evaluation goes through these and is logged once.
  CheckResult check(const ProofScript& script, bool full, AttemptRecord a);
  CheckResult probe(const std::vector<std::string>& prefix, AttemptRecord a);
  void log(AttemptRecord a);
  void stamp(AttemptRecord& a) const;

  bool out_of_time() const;
  double remaining_s() const;
  BlockSpan repair_block(const ProofScript& script, const Hole& hole, int stage,
                         std::size_t focus) const;
  std::string repair_prompt(const ProofScript& script, const BlockSpan& block,
                            const std::string& eff_goal, const std::vector<LineError>& errors,
                            const std::vector<std::string>& counterexamples,
                            const std::deque<std::string>& banned, std::size_t focus) const;
  std::vector<ScoredOutline> sample_and_rank(const HintSet& hints);
  // First ranked outline that normalizes, else the one-hole outline.
  ProofScript workable(const std::vector<ScoredOutline>& ranked);

  std::string goal_;
  PlannerConfig cfg_;
  PlannerDeps deps_;
  std::chrono::steady_clock::time_point t0_;
  PlanResult stats_;
  int generation_ = 0;
  const char* outline_type_ = attempt_type::kOutline;
  // Stamped on fill and repair records.
  std::optional<int> stage_;
  std::optional<std::string> hid_;
  int try_ = 0;
  std::map<std::string, std::string> banned_text_;  // fingerprint -> block
};

// Strips absolute paths, session names and timestamps from a prover message.
std::string normalize_error_message(std::string_view message);

// `COUNTEREXAMPLE: <var> = <value>` per binding.
std::vector<std::string> format_counterexample(const CounterexampleReport& report);

PlanResult plan_auto(std::string_view goal, const PlannerConfig& cfg, PlannerDeps deps);
PlanResult plan_outline(std::string_view goal, const PlannerConfig& cfg, PlannerDeps deps);

}  // namespace proofbeam

#endif  // PROOFBEAM_PLANNER_H_
