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

#include "proofbeam/service.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <future>
#include <thread>

#include "httplib.h"
#include "proofbeam/error.h"
#include "proofbeam/proposer_backends.h"
#include "testutil.h"

namespace proofbeam {
namespace {

using nlohmann::json;

const char* kRevOutline =
    "lemma \"rev (rev xs) = xs\"\n"
    "proof (induction xs)\n"
    "  case Nil\n"
    "  show ?case by simp\n"
    "next\n"
    "  case (Cons a xs)\n"
    "  show ?case sorry\n"
    "qed";

ServiceConfig quick_config() {
  ServiceConfig c;
  c.search.budget_s = 10;
  c.planner.budget_s = 10;
  c.planner.temperatures = {0.3};
  c.planner.samples_per_temp = 1;
  return c;
}

struct Fixture {
  MockBackend mock{testing::rev_space()};
  FaultInjectingBackend faulty{mock};
  OracleProposer oracle{mock.space()};
};

TEST(Commands, ApprovedPrefixes) {
  EXPECT_TRUE(is_approved_command("apply simp"));
  EXPECT_TRUE(is_approved_command("by auto"));
  EXPECT_TRUE(is_approved_command("done"));
  EXPECT_FALSE(is_approved_command("applyx"));
  EXPECT_FALSE(is_approved_command("lemma \"x\""));
  EXPECT_FALSE(is_approved_command("done."));
  const ProofScript s = parse_script("lemma \"G\"\n  apply  simp\n  by auto\n  sorry");
  EXPECT_EQ(approved_commands(s), (std::vector<std::string>{"apply simp", "by auto"}));
}

TEST(Loopback, Hosts) {
  EXPECT_TRUE(is_loopback("127.0.0.1"));
  EXPECT_TRUE(is_loopback("localhost"));
  EXPECT_TRUE(is_loopback("::1"));
  EXPECT_FALSE(is_loopback("0.0.0.0"));
  ServiceConfig c;
  c.host = "0.0.0.0";
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.allow_remote = true;
  EXPECT_NO_THROW(c.validate());
}

TEST(HandleProve, SolvableFixture) {
  Fixture f;
  Service s(quick_config(), f.mock, f.oracle);
  const Reply r = s.handle_prove({{"goal", "rev (rev xs) = xs"}});
  EXPECT_EQ(r.status, 200);
  EXPECT_TRUE(r.body["ok"].get<bool>());
  ASSERT_FALSE(r.body["commands"].empty());
  for (const auto& c : r.body["commands"]) EXPECT_TRUE(is_approved_command(c.get<std::string>()));
  EXPECT_GE(r.body["elapsed"].get<double>(), 0.0);
  ASSERT_EQ(s.memory_log().runs().size(), 1u);
  EXPECT_TRUE(s.memory_log().runs()[0].success);
}

TEST(HandleProve, UnsolvableAndMissingGoal) {
  Fixture f;
  FunctionProposer silent([](const ProposerCall&, std::size_t) { return std::string(); });
  Service s(quick_config(), f.mock, silent);
  const Reply r = s.handle_prove({{"goal", "rev (rev xs) = xs"}});
  EXPECT_EQ(r.status, 200);
  EXPECT_FALSE(r.body["ok"].get<bool>());
  EXPECT_TRUE(r.body["commands"].empty());
  EXPECT_EQ(s.handle_prove(json::object()).status, 400);
  EXPECT_EQ(s.handle_prove({{"goal", "  "}}).status, 400);
  EXPECT_EQ(s.handle_prove({{"goal", "x"}, {"beam", "wide"}}).status, 400);
  EXPECT_EQ(s.handle_prove({{"goal", "x"}, {"proposer", "nope"}}).status, 400);
}

TEST(HandlePlan, OutlineAutoAndBadMode) {
  Fixture f;
  FunctionProposer proposer([&](const ProposerCall& c, std::size_t) {
    if (c.system.find("outline") != std::string::npos) return std::string(kRevOutline);
    return f.oracle.complete(c.system, c.user, c.temperature, c.n);
  });
  Service s(quick_config(), f.mock, proposer);
  const Reply outline = s.handle_plan({{"goal", "rev (rev xs) = xs"}, {"mode", "outline"}});
  EXPECT_EQ(outline.status, 200);
  EXPECT_TRUE(outline.body["ok"].get<bool>());
  EXPECT_GE(outline.body["holes_remaining"].get<int>(), 0);
  EXPECT_NE(outline.body["script"].get<std::string>().find("proof (induction xs)"), std::string::npos);

  const Reply aut = s.handle_plan({{"goal", "rev (rev xs) = xs"}, {"mode", "auto"}});
  EXPECT_EQ(aut.status, 200);
  EXPECT_TRUE(aut.body["ok"].get<bool>());
  EXPECT_EQ(aut.body["holes_remaining"].get<int>(), 0);
  EXPECT_TRUE(aut.body["stats"].is_object());

  EXPECT_EQ(s.handle_plan({{"goal", "rev (rev xs) = xs"}, {"mode", "banana"}}).status, 400);
  EXPECT_EQ(s.handle_plan({{"mode", "auto"}}).status, 400);
}

TEST(MergedParams, RequestOverridesAndAbsentFallsBack) {
  Fixture f;
  ServiceConfig c = quick_config();
  c.search.beam_width = 3;
  c.search.max_depth = 5;
  c.search.budget_s = 7;
  c.planner.fill_beam = 2;
  c.planner.c1 = 4;
  Service s(c, f.mock, f.oracle);
  const SearchConfig d = s.merged_search(json::object());
  EXPECT_EQ(d.beam_width, 3);
  EXPECT_EQ(d.max_depth, 5);
  EXPECT_EQ(d.budget_s, 7);
  EXPECT_EQ(s.merged_search({{"beam", 6}}).beam_width, 6);
  EXPECT_EQ(s.merged_search({{"beam", 6}}).max_depth, 5);
  EXPECT_EQ(s.merged_search({{"depth", 2}}).max_depth, 2);
  EXPECT_EQ(s.merged_search({{"depth", 2}}).budget_s, 7);
  EXPECT_EQ(s.merged_search({{"budget", 1.5}}).budget_s, 1.5);
  EXPECT_EQ(s.merged_search({{"budget", 1.5}}).beam_width, 3);
  EXPECT_EQ(s.merged_search({{"lambda", 0.5}}).lambda, 0.5);
  EXPECT_EQ(s.merged_planner(json::object()).c1, 4);
  EXPECT_EQ(s.merged_planner({{"c1", 1}}).c1, 1);
  EXPECT_EQ(s.merged_planner({{"beam", 5}}).fill_beam, 5);
  EXPECT_EQ(s.merged_planner({{"beam", 5}}).c1, 4);
  EXPECT_EQ(s.merged_planner({{"mode", "outline"}}).mode, PlannerMode::kOutline);
  EXPECT_THROW(s.merged_search({{"beam", 0}}), std::invalid_argument);
}

TEST(Robustness, CrashAtEveryPhaseIsSurvived) {
  for (int n = 0; n < 12; ++n) {
    Fixture f;
    Service s(quick_config(), f.faulty, f.oracle);
    f.faulty.crash_after(n);
    const Reply first = s.handle_prove({{"goal", "rev (rev xs) = xs"}});
    EXPECT_TRUE(first.status == 200 || first.status == 503) << first.body.dump();
    EXPECT_FALSE(f.faulty.down()) << "phase " << n;
    const Reply second = s.handle_prove({{"goal", "rev (rev xs) = xs"}});
    EXPECT_EQ(second.status, 200);
    EXPECT_TRUE(second.body["ok"].get<bool>()) << "phase " << n;
    EXPECT_EQ(s.session_inits(), 1u);
  }
}

TEST(Robustness, PlanSurvivesCrashes) {
  Fixture f;
  FunctionProposer proposer([&](const ProposerCall& c, std::size_t) {
    if (c.system.find("outline") != std::string::npos) return std::string(kRevOutline);
    return f.oracle.complete(c.system, c.user, c.temperature, c.n);
  });
  Service s(quick_config(), f.faulty, proposer);
  f.faulty.crash_randomly(0.2, 11);
  for (int i = 0; i < 5; ++i) {
    const Reply r = s.handle_plan({{"goal", "rev (rev xs) = xs"}, {"mode", "auto"}, {"budget", 2}});
    EXPECT_TRUE(r.status == 200 || r.status == 503);
  }
  f.faulty.crash_randomly(0.0, 0);
  EXPECT_TRUE(s.handle_plan({{"goal", "rev (rev xs) = xs"}, {"mode", "auto"}}).body["ok"].get<bool>());
}

TEST(Persistence, OneSessionAcrossRequests) {
  Fixture f;
  Service s(quick_config(), f.mock, f.oracle);
  s.handle_prove({{"goal", "rev (rev xs) = xs"}});
  s.handle_prove({{"goal", "rev (rev xs) = xs"}});
  EXPECT_EQ(s.session_inits(), 1u);
  EXPECT_EQ(f.mock.sessions(), 1u);
  EXPECT_EQ(f.mock.restarts(), 0u);
}

TEST(Gate, BoundedQueue) {
  AdmissionGate gate(1, 1);
  ASSERT_TRUE(gate.enter());
  std::promise<bool> admitted;
  std::thread waiter([&] { admitted.set_value(gate.enter()); });
  while (gate.waiting() == 0) std::this_thread::yield();
  EXPECT_FALSE(gate.enter());
  gate.leave();
  EXPECT_TRUE(admitted.get_future().get());
  waiter.join();
  EXPECT_EQ(gate.running(), 1u);
  gate.leave();
  EXPECT_EQ(gate.running(), 0u);
}

TEST(Http, EndpointsAndBindFailure) {
  Fixture f;
  ServiceConfig c = quick_config();
  c.port = 0;
  Service s(c, f.mock, f.oracle);
  s.start();
  ASSERT_GT(s.port(), 0);
  httplib::Client client("127.0.0.1", s.port());
  auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(json::parse(health->body)["backend"], "mock");

  auto prove = client.Post("/prove", R"({"goal": "rev (rev xs) = xs"})", "application/json");
  ASSERT_TRUE(prove);
  EXPECT_EQ(prove->status, 200);
  EXPECT_TRUE(json::parse(prove->body)["ok"].get<bool>());

  auto bad = client.Post("/prove", "not json", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto banana = client.Post("/plan", R"({"goal": "g", "mode": "banana"})", "application/json");
  ASSERT_TRUE(banana);
  EXPECT_EQ(banana->status, 400);

  ServiceConfig clash = quick_config();
  clash.port = s.port();
  Service other(clash, f.mock, f.oracle);
  EXPECT_THROW(other.start(), BindFailure);
  s.stop();
}

TEST(Logging, JsonlFilesWritten) {
  Fixture f;
  ServiceConfig c = quick_config();
  c.log_dir = testing::temp_dir("service_logs");
  {
    Service s(c, f.mock, f.oracle);
    s.handle_prove({{"goal", "rev (rev xs) = xs"}});
  }
  const auto runs = read_runs(c.log_dir + "/runs.jsonl");
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_EQ(runs[0].mode, "prove");
  const auto attempts = read_attempts(c.log_dir + "/attempts.jsonl").attempts;
  EXPECT_FALSE(attempts.empty());
  for (const auto& a : attempts) EXPECT_EQ(a.run_id, runs[0].run_id);
}

TEST(Factories, ConfigDriven) {
  ServiceConfig c = quick_config();
  c.space = testing::fixture_path("rev_space.json");
  Service s(c);
  const Reply r = s.handle_prove({{"goal", "rev (rev xs) = xs"}});
  EXPECT_TRUE(r.body["ok"].get<bool>());
  EXPECT_EQ(s.handle_prove({{"goal", "g"}, {"proposer", "scripted"}}).status, 400);
  ServiceConfig missing;
  EXPECT_THROW(Service{missing}, std::invalid_argument);
}

}  // namespace
}  // namespace proofbeam
