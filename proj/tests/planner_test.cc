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

#include <gtest/gtest.h>

#include <map>
#include <set>

#include "proofbeam/datalog.h"
#include "proofbeam/mock_backend.h"
#include "proofbeam/proposer_backends.h"
#include "testutil.h"

namespace proofbeam {
namespace {

using testing::rev_space;

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

PlannerConfig fast_config() {
  PlannerConfig cfg;
  cfg.temperatures = {0.3, 0.7};
  cfg.samples_per_temp = 1;
  cfg.budget_s = 20;
  cfg.fill_budget_s = 5;
  cfg.repair_budget_s = 5;
  return cfg;
}

TEST(Escalate, Caps) {
  PlannerConfig cfg;
  PlannerState st;
  st.stage["h"] = 1;
  st.tries[{"h", 1}] = 1;
  escalate(st, "h", cfg);
  EXPECT_EQ(st.stage_of("h"), 1);
  st.tries[{"h", 1}] = 2;
  escalate(st, "h", cfg);
  EXPECT_EQ(st.stage_of("h"), 2);
  EXPECT_FALSE(st.regenerate);
  st.tries[{"h", 2}] = 3;
  escalate(st, "h", cfg);
  EXPECT_EQ(st.stage_of("h"), 2);
  EXPECT_TRUE(st.regenerate);
}

TEST(Escalate, FreshHoleCountsAsStageOne) {
  PlannerConfig cfg;
  PlannerState st;
  record_failure(st, "h", cfg);
  EXPECT_EQ(st.tries_of("h", 1), 1);
  EXPECT_EQ(st.stage_of("h"), 1);
  record_failure(st, "h", cfg);
  EXPECT_EQ(st.stage_of("h"), 2);
  for (int i = 0; i < 2; ++i) record_failure(st, "h", cfg);
  EXPECT_FALSE(st.regenerate);
  record_failure(st, "h", cfg);
  EXPECT_TRUE(st.regenerate);
  EXPECT_EQ(st.tries_of("h", 2), 3);
  EXPECT_EQ(st.tries_of("h", 1), 2);
}

TEST(BanStore, BoundedFifo) {
  PlannerState st;
  for (int i = 0; i < 12; ++i) st.ban("h", BlockKind::kHaveShow, "fp" + std::to_string(i), 8);
  EXPECT_EQ(st.ban_size("h", BlockKind::kHaveShow), 8u);
  EXPECT_FALSE(st.banned("h", BlockKind::kHaveShow, "fp0"));
  EXPECT_TRUE(st.banned("h", BlockKind::kHaveShow, "fp11"));
  EXPECT_FALSE(st.banned("h", BlockKind::kCaseBlock, "fp11"));
  st.ban("h", BlockKind::kHaveShow, "fp11", 8);
  EXPECT_EQ(st.ban_size("h", BlockKind::kHaveShow), 8u);
}

ProofScript holes_at(const std::vector<std::size_t>& lines, std::size_t size) {
  std::vector<std::string> out = {"lemma \"G\""};
  out.emplace_back("proof -");
  while (out.size() < size - 1) {
    const bool hole = std::find(lines.begin(), lines.end(), out.size()) != lines.end();
    out.push_back(hole ? "  have \"P" + std::to_string(out.size()) + "\" sorry"
                       : "  have \"Q" + std::to_string(out.size()) + "\" by simp");
  }
  out.emplace_back("qed");
  return ProofScript(out);
}

TEST(SelectFocus, NearestWithEarlierTieBreak) {
  const ProofScript a = holes_at({3, 9}, 12);
  const auto holes = find_holes(a);
  ASSERT_EQ(holes.size(), 2u);
  EXPECT_EQ(select_focus(a, 4), hole_id(a, holes[0]).hex());
  const ProofScript b = holes_at({2, 6}, 8);
  const auto bh = find_holes(b);
  EXPECT_EQ(select_focus(b, 4), hole_id(b, bh[0]).hex());
  EXPECT_EQ(select_focus(ProofScript({"lemma \"G\"", "  by simp"}), 4), std::nullopt);
}

TEST(ErrorMessages, Normalized) {
  EXPECT_EQ(normalize_error_message(
                "Failed at /home/u/work/Scratch.thy (in session HOL-Library) 2024-05-01T10:22:31Z"),
            "Failed at Scratch.thy");
  EXPECT_EQ(normalize_error_message("Undefined fact: foo"), "Undefined fact: foo");
}

TEST(Counterexamples, Formatting) {
  EXPECT_EQ(format_counterexample({{{"x", "0"}}, "mock"}),
            (std::vector<std::string>{"COUNTEREXAMPLE: x = 0"}));
  EXPECT_EQ(format_counterexample({{{"xs", "[a, b]"}, {"n", "1"}}, "mock"}),
            (std::vector<std::string>{"COUNTEREXAMPLE: xs = [a, b]", "COUNTEREXAMPLE: n = 1"}));
  MockBackend mock(rev_space());
  Verifier v(mock);
  FunctionProposer none([](const ProposerCall&, std::size_t) { return std::string(); });
  Planner p("rev xs = xs", fast_config(), {&v, &none});
  EXPECT_EQ(p.counterexample_hints("rev xs = xs"),
            (std::vector<std::string>{"COUNTEREXAMPLE: xs = [a, b]"}));
  EXPECT_TRUE(p.counterexample_hints("rev (rev xs) = xs").empty());
}

struct Rig {
  MockBackend mock{rev_space()};
  Verifier verifier{mock};
  MemorySink sink;
  RunLogger logger{sink, "run"};
};

TEST(ScoreOutline, CompositeFormula) {
  Rig rig;
  FunctionProposer none([](const ProposerCall&, std::size_t) { return std::string(); });
  Planner p("rev (rev xs) = xs", fast_config(), {&rig.verifier, &none});
  const ProofScript clean = parse_script(
      "lemma \"rev (rev xs) = xs\"\nproof (induction xs)\n  case Nil\n  show ?case sorry\nnext\n"
      "  case (Cons a xs)\n  show ?case sorry\nqed");
  const HintSet one = combine_hints({"Nil"}, {}, 12);
  const ScoredOutline s = p.score_outline(clean, one);
  EXPECT_TRUE(s.clean);
  EXPECT_EQ(s.holes, 2);
  EXPECT_EQ(s.bonus, 1);
  EXPECT_DOUBLE_EQ(s.score, 9.0);
  const ProofScript rejected = parse_script(
      "lemma \"rev (rev xs) = xs\"\n  apply magic\n  sorry\n  sorry\n  sorry");
  const ScoredOutline r = p.score_outline(rejected, {});
  EXPECT_FALSE(r.clean);
  EXPECT_DOUBLE_EQ(r.score, -3.0);
}

TEST(ScoreOutline, GammaZeroIgnoresHints) {
  Rig rig;
  FunctionProposer none([](const ProposerCall&, std::size_t) { return std::string(); });
  PlannerConfig cfg = fast_config();
  cfg.weights.gamma = 0;
  Planner p("rev (rev xs) = xs", cfg, {&rig.verifier, &none});
  const ProofScript a = parse_script("lemma \"rev (rev xs) = xs\"\n  using rev_append sorry");
  const ProofScript b = parse_script("lemma \"rev (rev xs) = xs\"\n  sorry");
  const HintSet h = combine_hints({"rev_append"}, {}, 12);
  EXPECT_EQ(p.score_outline(a, h).score, p.score_outline(b, h).score);
}

TEST(SampleOutlines, CardinalityAndDedup) {
  Rig rig;
  int calls = 0;
  FunctionProposer distinct([&](const ProposerCall&, std::size_t i) {
    ++calls;
    return "proof -\n  show ?thesis sorry" + std::string(i, ' ') + "\n  have \"P" +
           std::to_string(i) + "\" sorry\nqed";
  });
  PlannerConfig cfg = fast_config();
  cfg.samples_per_temp = 2;
  Planner p("rev (rev xs) = xs", cfg, {&rig.verifier, &distinct});
  EXPECT_LE(p.sample_outlines({}).size(), 4u);
  EXPECT_EQ(calls, 4);

  FunctionProposer same([](const ProposerCall&, std::size_t) { return std::string(kRevOutline); });
  Planner q("rev (rev xs) = xs", cfg, {&rig.verifier, &same});
  EXPECT_EQ(q.sample_outlines({}).size(), 1u);

  FunctionProposer junk([](const ProposerCall&, std::size_t) { return std::string("I cannot."); });
  Planner r("rev (rev xs) = xs", cfg, {&rig.verifier, &junk});
  EXPECT_TRUE(r.sample_outlines({}).empty());
}

TEST(EffectiveGoal, StateThenFallback) {
  Rig rig;
  FunctionProposer none([](const ProposerCall&, std::size_t) { return std::string(); });
  Planner p("rev (rev xs) = xs", fast_config(), {&rig.verifier, &none});
  const ProofScript s = split_sorry_lines(parse_script(kRevOutline));
  const auto holes = find_holes(s);
  ASSERT_EQ(holes.size(), 1u);
  EXPECT_EQ(p.effective_goal(s, holes[0]), "rev (rev (a # xs)) = a # xs");
  const ProofScript broken = parse_script("lemma \"rev (rev xs) = xs\"\n  apply magic\n  sorry");
  EXPECT_EQ(p.effective_goal(broken, find_holes(broken)[0]), "rev (rev xs) = xs");
}

TEST(EarliestFailureLine, MinAndClamp) {
  Rig rig;
  FunctionProposer none([](const ProposerCall&, std::size_t) { return std::string(); });
  Planner p("rev (rev xs) = xs", fast_config(), {&rig.verifier, &none});
  const ProofScript bad = parse_script(
      "lemma \"rev (rev xs) = xs\"\n  apply (induction xs)\n  apply blast\n  apply simp\n  sorry");
  EXPECT_EQ(p.earliest_failure_line(bad, find_holes(bad)[0]), 2u);
  const ProofScript ok = split_sorry_lines(parse_script(kRevOutline));
  const Hole h = find_holes(ok)[0];
  EXPECT_EQ(p.earliest_failure_line(ok, h), h.start_line);
}

TEST(FillHole, VerifiedSplice) {
  Rig rig;
  OracleProposer oracle(rig.mock.space());
  FunctionProposer none([](const ProposerCall&, std::size_t) { return std::string(); });
  PlannerDeps deps{&rig.verifier, &none, &oracle};
  Planner p("rev (rev xs) = xs", fast_config(), deps);
  PlannerState st;
  const Outcome o = p.fill_hole(parse_script(kRevOutline), 0, st);
  ASSERT_EQ(o.kind, OutcomeKind::kVerified);
  EXPECT_TRUE(rig.verifier.verify_full(*o.script).success);
  EXPECT_TRUE(find_holes(*o.script).empty());
}

TEST(FillHole, ApplyOnlyIsPartialAndWrapped) {
  Rig rig;
  FunctionProposer steps([](const ProposerCall& c, std::size_t) {
    return c.system.find("apply <method>") != std::string::npos ? std::string("apply simp")
                                                                 : std::string();
  });
  FunctionProposer none([](const ProposerCall&, std::size_t) { return std::string(); });
  PlannerDeps deps{&rig.verifier, &none, &steps};
  Planner p("rev (rev xs) = xs", fast_config(), deps);
  PlannerState st;
  const Outcome o = p.fill_hole(parse_script(kRevOutline), 0, st);
  ASSERT_EQ(o.kind, OutcomeKind::kPartial);
  EXPECT_GE(o.opened.size(), 1u);
  EXPECT_NE(o.script->render().find("proof -"), std::string::npos);
  EXPECT_NE(o.script->render().find("apply simp"), std::string::npos);
  EXPECT_TRUE(rig.verifier.check_script(*o.script).success);
}

TEST(FillHole, NothingFound) {
  Rig rig;
  FunctionProposer none([](const ProposerCall&, std::size_t) { return std::string(); });
  Planner p("rev (rev xs) = xs", fast_config(), {&rig.verifier, &none});
  PlannerState st;
  EXPECT_EQ(p.fill_hole(parse_script(kRevOutline), 0, st).kind, OutcomeKind::kNoChange);
}

std::size_t count_type(const std::vector<AttemptRecord>& a, const char* type) {
  return static_cast<std::size_t>(
      std::count_if(a.begin(), a.end(), [&](const AttemptRecord& r) { return r.type == type; }));
}

TEST(CegisRepair, SecondCandidateVerifies) {
  Rig rig;
  FunctionProposer repair([](const ProposerCall&, std::size_t i) {
    return i == 0 ? std::string("show ?case by blast")
                  : std::string("show ?case\n  apply simp\n  by auto");
  });
  PlannerDeps deps{&rig.verifier, &repair};
  deps.logger = &rig.logger;
  Planner p("rev (rev xs) = xs", fast_config(), deps);
  PlannerState st;
  const Outcome o = p.cegis_repair(parse_script(kRevOutline), 0, st, 5);
  ASSERT_EQ(o.kind, OutcomeKind::kVerified);
  const auto attempts = rig.sink.attempts();
  EXPECT_EQ(attempts.size(), rig.verifier.evaluations());
  EXPECT_TRUE(rig.verifier.verify_full(*o.script).success);
  EXPECT_EQ(count_type(attempts, attempt_type::kRepair), 2u);
  for (const auto& a : attempts) {
    if (a.type != attempt_type::kRepair) continue;
    EXPECT_EQ(a.block_kind, "have_show");
    EXPECT_EQ(a.stage, 1);
  }
}

TEST(CegisRepair, BannedRepeatSkippedWithoutVerifierCall) {
  Rig rig;
  FunctionProposer repair([](const ProposerCall&, std::size_t) { return std::string("show ?case by blast"); });
  PlannerDeps deps{&rig.verifier, &repair};
  deps.logger = &rig.logger;
  PlannerConfig cfg = fast_config();
  cfg.repair_proposals = 5;
  Planner p("rev (rev xs) = xs", cfg, deps);
  PlannerState st;
  const Outcome o = p.cegis_repair(parse_script(kRevOutline), 0, st, 5);
  EXPECT_EQ(o.kind, OutcomeKind::kNoChange);
  EXPECT_EQ(count_type(rig.sink.attempts(), attempt_type::kRepair), 1u);
}

TEST(CegisRepair, PartialProgressTag) {
  Rig rig;
  FunctionProposer repair([](const ProposerCall&, std::size_t) {
    return std::string("show ?case\n  apply simp\n  by blast");
  });
  PlannerDeps deps{&rig.verifier, &repair};
  PlannerConfig cfg = fast_config();
  cfg.repair_candidates = 1;
  Planner p("rev (rev xs) = xs", cfg, deps);
  PlannerState st;
  const Outcome o = p.cegis_repair(parse_script(kRevOutline), 0, st, 5);
  ASSERT_EQ(o.kind, OutcomeKind::kPartial);
  EXPECT_EQ(o.tag, "stage=1 partial-progress");
  EXPECT_TRUE(rig.verifier.check_script(*o.script).success);
  EXPECT_NE(o.script->render().find("apply simp"), std::string::npos);
}

TEST(PlanAuto, EndToEndOracleFill) {
  Rig rig;
  OracleProposer oracle(rig.mock.space());
  FunctionProposer outline([](const ProposerCall&, std::size_t) { return std::string(kRevOutline); });
  PlannerDeps deps{&rig.verifier, &outline, &oracle};
  deps.logger = &rig.logger;
  PlannerConfig cfg = fast_config();
  cfg.budget_s = 30;
  const PlanResult r = plan_auto("rev (rev xs) = xs", cfg, deps);
  ASSERT_TRUE(r.solved);
  EXPECT_TRUE(find_holes(*r.script).empty());
  EXPECT_TRUE(rig.verifier.verify_full(*r.script).success);
  EXPECT_EQ(r.repairs_attempted, 0);
  EXPECT_EQ(rig.sink.attempts().size() + 1, rig.verifier.evaluations());
}

TEST(PlanAuto, ZeroBudget) {
  Rig rig;
  FunctionProposer outline([](const ProposerCall&, std::size_t) { return std::string(kRevOutline); });
  PlannerConfig cfg = fast_config();
  cfg.budget_s = 0;
  const PlanResult r = plan_auto("rev (rev xs) = xs", cfg, {&rig.verifier, &outline});
  EXPECT_FALSE(r.solved);
  ASSERT_TRUE(r.script.has_value());
  EXPECT_EQ(r.script->render(), "lemma \"rev (rev xs) = xs\"\n  sorry");
}

TEST(PlanAuto, StallsWhenEveryProposalIsBanned) {
  Rig rig;
  FunctionProposer proposer([](const ProposerCall& c, std::size_t) {
    if (is_outline_prompt(c)) return std::string(kRevOutline);
    return std::string("show ?case by (magic)");
  });
  FunctionProposer nothing([](const ProposerCall&, std::size_t) { return std::string(); });
  PlannerConfig cfg = fast_config();
  cfg.enforce_holes = false;
  cfg.budget_s = 60;
  cfg.regeneration_cap = 0;
  cfg.stall_limit = 5;
  const PlanResult r = plan_auto("rev (rev xs) = xs", cfg, {&rig.verifier, &proposer, &nothing});
  EXPECT_FALSE(r.solved);
  EXPECT_TRUE(r.stalled);
  EXPECT_FALSE(r.timed_out);
  EXPECT_GT(r.banned_skips, 0);
  ASSERT_TRUE(r.script.has_value());
  EXPECT_EQ(find_holes(*r.script).size(), 1u);
  EXPECT_GT(r.script->size(), 2u);
}

TEST(PlanAuto, CapsVisibleInAttemptLog) {
  Rig rig;
  FunctionProposer proposer([](const ProposerCall& c, std::size_t i) {
    if (is_outline_prompt(c)) return std::string(kRevOutline);
    const std::string bad = "show ?case by (magic " + std::to_string(i) + ")";
    if (c.user.find("KIND: case_block") != std::string::npos) return "case (Cons a xs)\n" + bad;
    return bad;
  });
  FunctionProposer nothing([](const ProposerCall&, std::size_t) { return std::string(); });
  PlannerDeps deps{&rig.verifier, &proposer, &nothing};
  deps.logger = &rig.logger;
  PlannerConfig cfg = fast_config();
  cfg.enforce_holes = false;
  cfg.budget_s = 1.5;
  cfg.repair_candidates = 1;
  cfg.regeneration_cap = 1;
  const PlanResult r = plan_auto("rev (rev xs) = xs", cfg, deps);
  EXPECT_FALSE(r.solved);
  EXPECT_EQ(r.regenerations, 1);
  // Per generation and hole: the (stage, try) sequence of repair records.
  std::map<std::pair<int, std::string>, std::vector<std::pair<int, int>>> seq;
  std::vector<std::string> order;
  for (const auto& a : rig.sink.attempts()) {
    order.push_back(a.type);
    if (a.type != attempt_type::kRepair) continue;
    seq[{a.extra.value("generation", -1), *a.hid}].push_back({*a.stage, a.extra.value("try", 0)});
  }
  ASSERT_FALSE(seq.empty());
  for (const auto& [key, tries] : seq) {
    std::vector<std::pair<int, int>> expect = {{1, 1}, {1, 2}, {2, 1}, {2, 2}, {2, 3}};
    ASSERT_GE(tries.size(), key.first == 0 ? 5u : 2u);
    for (std::size_t i = 0; i < std::min(tries.size(), expect.size()); ++i) {
      EXPECT_EQ(tries[i], expect[i]) << "generation " << key.first << " index " << i;
    }
  }
  // Regeneration records follow the third stage-2 failure of generation 0.
  const auto first_regen = std::find(order.begin(), order.end(), attempt_type::kRegeneration);
  ASSERT_NE(first_regen, order.end());
  int repairs_before = 0;
  for (auto it = order.begin(); it != first_regen; ++it) repairs_before += *it == "repair";
  EXPECT_EQ(repairs_before, 5);
}

TEST(PlannerConfigTest, JsonAndValidate) {
  PlannerConfig cfg;
  cfg.c1 = 4;
  cfg.temperatures = {0.5};
  const PlannerConfig back = PlannerConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.c1, 4);
  EXPECT_EQ(back.temperatures, std::vector<double>{0.5});
  EXPECT_EQ(PlannerConfig::from_json(nlohmann::json::object()).c2, 3);
  PlannerConfig bad;
  bad.temperatures.clear();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = PlannerConfig{};
  bad.c1 = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_THROW(parse_planner_mode("nope"), std::invalid_argument);
}

}  // namespace
}  // namespace proofbeam
