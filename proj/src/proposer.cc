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

#include "proofbeam/proposer.h"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>

#include "proofbeam/text.h"

namespace proofbeam {

double step_temperature(int s) { return std::min(0.9, 0.5 + 0.1 * s); }

double finish_temperature(int s) { return std::min(0.6, 0.2 + 0.05 * s); }

double temperature_for(CheckMode mode, int s) {
  return mode == CheckMode::kStep ? step_temperature(s) : finish_temperature(s);
}

namespace {

constexpr std::string_view kStepSystem =
    "You are an Isabelle/HOL proof assistant. Propose between 3 and 8 candidate next proof "
    "steps for the current goal state, one per line. Every line must be a single command of "
    "the form `apply <method>`. Output commands only: no prose, no comments, no numbering.";

constexpr std::string_view kFinishSystem =
    "You are an Isabelle/HOL proof assistant. Propose between 3 and 8 candidate commands that "
    "close all remaining subgoals, one per line. Every line must be `by <method>` or exactly "
    "`done`. Output commands only: no prose, no comments, no numbering.";

const std::set<std::string> kNonVariables = {
    "rev",  "map",   "length", "set",   "hd",    "tl",     "last",   "butlast", "filter",
    "foldr", "foldl", "sum",   "prod",  "card",  "if",     "then",   "else",    "let",
    "in",   "case",  "of",     "fst",   "snd",   "take",   "drop",   "zip",     "append",
    "concat", "distinct", "sorted", "min", "max", "abs", "div", "mod", "dvd", "insert",
    "image", "vimage", "inj", "surj", "bij", "finite", "nat", "int", "real", "list",
    "undefined", "the", "some", "all", "ex", "and", "or", "not", "o"};

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

bool is_ident_char(char c) {
  return is_ident_start(c) || (c >= '0' && c <= '9') || c == '\'';
}

}  // namespace

std::string hints_line(const std::vector<std::string>& hints) {
  std::string out = std::string(kHintsSection) + " Prefer using ";
  for (std::size_t i = 0; i < hints.size(); ++i) {
    if (i) out += ", ";
    out += hints[i];
  }
  return out + " if applicable.";
}

Prompt build_prompt(const ProposalContext& ctx, CheckMode mode) {
  Prompt p;
  p.system = std::string(mode == CheckMode::kStep ? kStepSystem : kFinishSystem);
  std::ostringstream u;
  u << kGoalSection << '\n' << ctx.goal << '\n';
  u << kStepsSection << '\n';
  if (ctx.accepted_steps.empty()) {
    u << "(none)\n";
  } else {
    for (const auto& s : ctx.accepted_steps) u << s << '\n';
  }
  u << kStateSection << '\n';
  u << (text::trim(ctx.state_hint).empty() ? std::string("(empty)") : ctx.state_hint) << '\n';
  u << kFactsSection << '\n';
  if (ctx.helpful_facts.empty()) {
    u << "(none)\n";
  } else {
    for (std::size_t i = 0; i < ctx.helpful_facts.size(); ++i) {
      u << (i ? ", " : "") << ctx.helpful_facts[i];
    }
    u << '\n';
    u << hints_line(ctx.helpful_facts) << '\n';
  }
  p.user = u.str();
  return p;
}

std::string prompt_section(std::string_view prompt, std::string_view section) {
  static const std::vector<std::string> kHeaders = {"GOAL:",     "STEPS:", "STATE:",
                                                    "FACTS:",    "HINTS:", "ERRORS:",
                                                    "CONTEXT:",  "BLOCK:", "COUNTEREXAMPLES:",
                                                    "BANNED:",   "KIND:",  "OUTLINE:"};
  const std::string want = std::string(section) + ":";
  const auto lines = text::split_lines(prompt);
  std::vector<std::string> body;
  bool in = false;
  for (const auto& l : lines) {
    const std::string_view t = text::trim(l);
    const bool header = std::any_of(kHeaders.begin(), kHeaders.end(),
                                    [&](const std::string& h) { return t.starts_with(h); });
    if (header) {
      if (in) break;
      if (t.starts_with(want)) {
        in = true;
        std::string_view rest = text::trim(t.substr(want.size()));
        if (!rest.empty()) body.emplace_back(rest);
      }
      continue;
    }
    if (in) body.push_back(l);
  }
  while (!body.empty() && text::trim(body.back()).empty()) body.pop_back();
  std::string out = text::join_lines(body);
  if (out == "(empty)" || out == "(none)") return {};
  return out;
}

bool has_approved_prefix(std::string_view c, CheckMode mode) {
  if (mode == CheckMode::kStep) return c.starts_with("apply ") && c.size() > 6;
  return (c.starts_with("by ") && c.size() > 3) || c == "done";
}

std::vector<std::string> sanitize(std::string_view raw, CheckMode mode) {
  static const std::regex kNumbering(R"(^\s*(\(?\d+[.):]|[-*+]|\xE2\x80\xA2)\s+)");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const std::string& line : text::split_lines(raw)) {
    std::string l(text::trim(line));
    if (l.starts_with("```")) continue;
    l = std::regex_replace(l, kNumbering, "", std::regex_constants::format_first_only);
    l = text::collapse_whitespace(l);
    if (l.size() >= 2 && l.front() == '`' && l.back() == '`') {
      l = text::collapse_whitespace(l.substr(1, l.size() - 2));
    }
    if (l.size() > kMaxCommandLength) continue;
    if (!has_approved_prefix(l, mode)) continue;
    if (seen.insert(l).second) out.push_back(std::move(l));
  }
  return out;
}

std::vector<std::string> extract_variables(std::string_view state_hint, std::string_view goal) {
  std::string src = first_subgoal(state_hint).value_or(std::string(goal));
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](std::string v) {
    if (seen.insert(v).second) out.push_back(std::move(v));
  };
  bool quoted = false;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (c == '"') {
      quoted = !quoted;
      ++i;
      continue;
    }
    // Quantifier binders: ∀ ∃ ⋀ or ALL/EX, names up to the dot.
    const bool binder = src.compare(i, 3, "\xE2\x88\x80") == 0 ||
                        src.compare(i, 3, "\xE2\x88\x83") == 0 ||
                        src.compare(i, 3, "\xE2\x8B\x80") == 0;
    if (binder) {
      std::size_t j = i + 3;
      const std::size_t dot = src.find('.', j);
      if (dot != std::string::npos) {
        std::istringstream names(src.substr(j, dot - j));
        for (std::string n; names >> n;) {
          if (!n.empty() && n[0] >= 'a' && n[0] <= 'z') add(n);
        }
      }
      i = j;
      continue;
    }
    if (!is_ident_start(c) || (i > 0 && (is_ident_char(src[i - 1]) || src[i - 1] == '?' ||
                                         src[i - 1] == '.'))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < src.size() && is_ident_char(src[j])) ++j;
    std::string word = src.substr(i, j - i);
    std::size_t k = j;
    while (k < src.size() && src[k] == ' ') ++k;
    const bool dotted = j < src.size() && src[j] == '.';
    const bool applied =
        k > j && k < src.size() && (is_ident_char(src[k]) || src[k] == '(' || src[k] == '[');
    const bool lower = word[0] >= 'a' && word[0] <= 'z';
    if (lower && !applied && !dotted && !kNonVariables.count(word)) add(word);
    i = j;
  }
  return out;
}

std::vector<std::string> heuristic_variants(std::string_view state_hint, std::string_view goal,
                                            const std::vector<std::string>& helpful_facts) {
  std::vector<std::string> out;
  for (const auto& v : extract_variables(state_hint, goal)) {
    out.push_back("apply (induction " + v + ")");
    out.push_back("apply (cases " + v + ")");
  }
  for (std::size_t i = 0; i < helpful_facts.size() && i < kMaxRuleTemplates; ++i) {
    out.push_back("apply (rule " + helpful_facts[i] + ")");
  }
  for (const char* fixed : {"apply simp", "apply auto", "apply blast"}) out.emplace_back(fixed);
  std::vector<std::string> dedup;
  std::set<std::string> seen;
  for (auto& c : out) {
    if (seen.insert(c).second) dedup.push_back(std::move(c));
  }
  return dedup;
}

std::vector<std::string> propose(ProposerBackend& backend, const ProposalContext& ctx,
                                 CheckMode mode, int k) {
  const Prompt p = build_prompt(ctx, mode);
  const double t = temperature_for(mode, ctx.stagnation);
  std::vector<std::string> out = sanitize(backend.complete(p.system, p.user, t, k), mode);
  if (mode == CheckMode::kStep && ctx.stagnation >= kInjectionThreshold) {
    std::set<std::string> seen(out.begin(), out.end());
    for (auto& v : heuristic_variants(ctx.state_hint, ctx.goal, ctx.helpful_facts)) {
      if (seen.insert(v).second) out.push_back(std::move(v));
    }
  }
  if (k >= 0 && out.size() > static_cast<std::size_t>(k)) out.resize(static_cast<std::size_t>(k));
  return out;
}

}  // namespace proofbeam
