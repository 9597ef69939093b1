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

#include "proofbeam/cli.h"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "proofbeam/datalog.h"
#include "proofbeam/hints.h"
#include "proofbeam/rerank.h"
#include "testutil.h"

namespace proofbeam {
namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, ProveSolvableFixture) {
  const CliRun r = cli({"prove", "--goal", "rev (rev xs) = xs", "--backend", "mock", "--space",
                     testing::fixture_path("rev_space.json"), "--budget", "10"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("lemma \"rev (rev xs) = xs\"", 0), 0u);
  EXPECT_TRUE(nlohmann::json::parse(r.err)["solved"].get<bool>());
}

TEST(Cli, ProveUnsolvedExitsOne) {
  const CliRun r = cli({"prove", "--goal", "rev (rev xs) = xs", "--space",
                     testing::fixture_path("rev_space.json"), "--depth", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({"prove", "--goal", "g", "--frobnicate"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"prove"}).code, 2);
  EXPECT_EQ(cli({"prove", "--goal", "g", "--backend", "coq"}).code, 2);
  EXPECT_EQ(cli({"plan", "--goal", "g", "--mode", "banana"}).code, 2);
  // A mock backend without a space is a usage error too.
  EXPECT_EQ(cli({"prove", "--goal", "g"}).code, 2);
  const CliRun help = cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("gen-space"), std::string::npos);
}

TEST(Cli, GenSpaceIsDeterministic) {
  const std::string dir = testing::temp_dir("cli_gen");
  const std::string a = dir + "/a.json", b = dir + "/b.json";
  for (const auto& path : {a, b}) {
    EXPECT_EQ(cli({"gen-space", "--depth", "3", "--branching", "2", "--solutions", "1", "--seed", "7",
                   "-o", path})
                  .code,
              0);
  }
  EXPECT_FALSE(slurp(a).empty());
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NO_THROW(SyntheticSpace::load(a).validate());
}

TEST(Cli, PlanOnGeneratedSpace) {
  const CliRun r = cli({"outline", "--goal", "rev (rev xs) = xs", "--space",
                     testing::fixture_path("rev_space.json"), "--budget", "5"});
  // The oracle proposer never writes outlines, so only the fallback exists.
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("sorry"), std::string::npos);
  EXPECT_TRUE(nlohmann::json::parse(r.err).contains("holes_remaining"));
}

TEST(Cli, LogsDatasetsAndTraining) {
  const std::string dir = testing::temp_dir("cli_pipeline");
  const std::string logs = dir + "/logs";
  ASSERT_EQ(cli({"prove", "--goal", "rev (rev xs) = xs", "--space",
                 testing::fixture_path("rev_space.json"), "--log-dir", logs})
                .code,
            0);
  const std::string attempts = logs + "/attempts.jsonl";
  for (const char* kind : {"reranker", "trajectories", "premises", "repairs"}) {
    const CliRun r = cli({"build-dataset", "--attempts", attempts, "--kind", kind, "-o", dir + "/" + kind});
    EXPECT_EQ(r.code, 0) << kind << r.err;
  }
  EXPECT_FALSE(slurp(dir + "/reranker").empty());
  const CliRun train = cli({"train-reranker", "--attempts", attempts, "-o", dir + "/model.txt"});
  EXPECT_EQ(train.code, 0) << train.err;
  EXPECT_NO_THROW(load_model(dir + "/model.txt"));
  EXPECT_EQ(cli({"train-reranker", "--attempts", dir + "/missing.jsonl", "-o", dir + "/m"}).code, 2);
}

TEST(Cli, MineLexicon) {
  const std::string dir = testing::temp_dir("cli_lexicon");
  {
    std::ofstream corpus(dir + "/corpus.jsonl");
    corpus << R"({"goal": "rev (rev xs) = xs", "lemmas": ["rev_rev_ident"]})" << '\n';
    corpus << R"({"goal": "length ys = 0", "lemmas": ["length_0_conv"]})" << '\n';
  }
  ASSERT_EQ(cli({"mine-lexicon", "--corpus", dir + "/corpus.jsonl", "-o", dir + "/lex.json"}).code, 0);
  const HintLexicon lex = HintLexicon::load(dir + "/lex.json");
  EXPECT_FALSE(lex.empty());
  EXPECT_EQ(lexicon_hints(lex, "rev xs", 1), (std::vector<std::string>{"rev_rev_ident"}));
}

}  // namespace
}  // namespace proofbeam
