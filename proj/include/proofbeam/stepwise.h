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

#ifndef PROOFBEAM_STEPWISE_H_
#define PROOFBEAM_STEPWISE_H_

#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proofbeam/datalog.h"
#include "proofbeam/premises.h"
#include "proofbeam/proposer.h"
#include "proofbeam/rerank.h"
#include "proofbeam/script.h"
#include "proofbeam/verifier.h"

namespace proofbeam {

// Subgoal count used when the state printout did not parse.
inline constexpr int kUnknownSubgoals = 1'000'000;

struct BeamEntry {
  std::vector<std::string> lines;  // header followed by accepted steps
  double score = 0.0;              // reranker-adjusted key, for logging only
  std::string state_hint;
  int subgoals = kUnknownSubgoals;

  std::size_t length() const { return lines.size(); }
  std::vector<std::string> steps() const { return {lines.begin() + 1, lines.end()}; }
};

struct SearchConfig {
  int beam_width = 4;
  int max_depth = 8;
  double budget_s = 120.0;
  int candidates = kDefaultCandidates;
  double lambda = 2.0;
  int refute_interval = 3;
  int finish_trigger = 2;
  Millis step_timeout{30'000};
  bool refute = true;
  std::size_t premise_k_select = 16;
  std::size_t premise_k_rerank = 0;
  std::size_t helpful_facts = 4;  // retrieved ids passed to the proposer
  RetrievalBackend premise_backend = RetrievalBackend::kTfidf;

  nlohmann::json to_json() const;
  // Missing keys keep their defaults. Throws std::invalid_argument.
  static SearchConfig from_json(const nlohmann::json& j);
  // Throws std::invalid_argument when an invariant does not hold.
  void validate() const;
};

// Everything prove talks to. Only verifier and proposer are required.
struct SearchDeps {
  Verifier* verifier = nullptr;
  ProposerBackend* proposer = nullptr;
  const RerankModel* reranker = nullptr;
  const PremiseIndex* premises = nullptr;
  const PairScorer* premise_scorer = nullptr;
  GlobalCache* global_cache = nullptr;
  RunLogger* logger = nullptr;
  // Applied to every attempt record before it is logged.
  std::function<void(AttemptRecord&)> decorate;
  const std::atomic<bool>* cancel = nullptr;
};

struct RoundTrace {
  int round = 0;
  std::vector<std::string> fingerprints;  // of the live beam
  int min_subgoals = kUnknownSubgoals;
  int stagnation = 0;
  std::size_t successes = 0;
  std::size_t pruned = 0;
};

struct ProofResult {
  bool solved = false;
  std::optional<ProofScript> script;  // set when solved
  // Steps of the best entry seen, for callers that use partial progress.
  std::vector<std::string> best_steps;
  int best_subgoals = kUnknownSubgoals;
  int depth_reached = 0;
  int expansions = 0;
  std::uint64_t verifier_calls = 0;
  std::uint64_t refute_calls = 0;
  double elapsed_s = 0.0;
  bool timed_out = false;
  std::vector<RoundTrace> rounds;
};

// Stable sort by (subgoals, length), first entry per state fingerprint kept,
// truncated to `width`.
std::vector<BeamEntry> expand_beam(std::vector<BeamEntry> successes, std::size_t width);

struct RankedCandidate {
  std::string command;
  std::size_t index = 0;          // proposer position, the heuristic term
  double reranker_score = 0.0;    // f(x); 0 without a model
  double key = 0.0;               // index - lambda * f(x)
  FeatureVector features;
};

// Ascending by index - lambda * f(x), stable. `stats` is per candidate and
// may be empty.
std::vector<RankedCandidate> order_candidates(const std::vector<std::string>& candidates,
                                              const FeatureContext& ctx,
                                              const RerankModel* reranker, double lambda,
                                              const std::vector<PremiseStats>& stats = {});

// Quantifier or Boolean structure in the goal or state.
bool has_logical_structure(std::string_view text);

// round % interval == 0 and the goal or state has logical structure.
bool should_refute(std::string_view goal, std::string_view state_hint, int round, int interval);

ProofResult prove(std::string_view goal, const SearchConfig& cfg, SearchDeps& deps);

struct MinimiseOptions {
  double budget_s = 30.0;
  RunLogger* logger = nullptr;
  std::string goal;
};

// Greedy shrinking; the result verifies and is never longer than the input.
ProofScript minimise(const ProofScript& script, Verifier& verifier,
                     const MinimiseOptions& opts = {});

// `proof -` / `show ?thesis by m` / `qed` around a one-line `by m` proof, kept
// only when it verifies.
ProofScript to_isar(const ProofScript& script, Verifier& verifier);

}  // namespace proofbeam

#endif  // PROOFBEAM_STEPWISE_H_
