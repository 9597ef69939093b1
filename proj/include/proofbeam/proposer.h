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

#ifndef PROOFBEAM_PROPOSER_H_
#define PROOFBEAM_PROPOSER_H_

#include <string>
#include <string_view>
#include <vector>

#include "proofbeam/verifier.h"

namespace proofbeam {

struct ProposalContext {
  std::string goal;
  std::vector<std::string> accepted_steps;
  std::string state_hint;
  std::vector<std::string> helpful_facts;
  int stagnation = 0;
  int depth = 0;
};

// The language model, as a black box that turns prompts into text.
class ProposerBackend {
 public:
  virtual ~ProposerBackend() = default;
  // Throws BackendUnavailable when the model cannot be reached.
  virtual std::string complete(const std::string& system, const std::string& user,
                               double temperature, int n) = 0;
  virtual std::string name() const = 0;
};

inline constexpr int kDefaultCandidates = 6;
inline constexpr int kInjectionThreshold = 3;
inline constexpr std::size_t kMaxCommandLength = 200;
inline constexpr std::size_t kMaxRuleTemplates = 3;

// min(0.9, 0.5 + 0.1 s) and min(0.6, 0.2 + 0.05 s).
double step_temperature(int stagnation);
double finish_temperature(int stagnation);
double temperature_for(CheckMode mode, int stagnation);

struct Prompt {
  std::string system;
  std::string user;
};

// Section headers of the user prompt.
inline constexpr std::string_view kGoalSection = "GOAL:";
inline constexpr std::string_view kStepsSection = "STEPS:";
inline constexpr std::string_view kStateSection = "STATE:";
inline constexpr std::string_view kFactsSection = "FACTS:";
inline constexpr std::string_view kHintsSection = "HINTS:";

Prompt build_prompt(const ProposalContext& ctx, CheckMode mode);

// "HINTS: Prefer using h1, h2 if applicable."
std::string hints_line(const std::vector<std::string>& hints);

// Body of `section` (e.g. "STATE") in a prompt built by this module or the
// planner; empty when absent or marked empty.
std::string prompt_section(std::string_view prompt, std::string_view section);

// Approved prefixes: `apply ` for steps, `by ` or exactly `done` for
// finishers.
bool has_approved_prefix(std::string_view command, CheckMode mode);

std::vector<std::string> sanitize(std::string_view raw, CheckMode mode);

// Candidate variable names: lowercase identifiers of the first subgoal (or of
// the goal when no state is available) that are not applied to arguments,
// plus names bound by quantifiers. Appearance order, deduplicated.
std::vector<std::string> extract_variables(std::string_view state_hint, std::string_view goal);

// Induction/cases per variable, then `apply (rule f)` for up to three
// helpful facts, then simp, auto and blast.
std::vector<std::string> heuristic_variants(std::string_view state_hint, std::string_view goal,
                                            const std::vector<std::string>& helpful_facts = {});

// One backend call, then sanitize; heuristic variants are appended in step
// mode once stagnation reaches kInjectionThreshold. Truncated to k.
std::vector<std::string> propose(ProposerBackend& backend, const ProposalContext& ctx,
                                 CheckMode mode, int k = kDefaultCandidates);

}  // namespace proofbeam

#endif  // PROOFBEAM_PROPOSER_H_
