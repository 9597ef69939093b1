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

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <thread>

#include "CLI11.hpp"
#include "proofbeam/datasets.h"
#include "proofbeam/error.h"
#include "proofbeam/hints.h"
#include "proofbeam/mock_backend.h"
#include "proofbeam/rerank.h"
#include "proofbeam/service.h"

namespace proofbeam {

using json = nlohmann::json;

namespace {

struct RunFlags {
  std::string goal;
  std::optional<double> budget;
  std::optional<int> beam;
  std::optional<int> depth;
  std::string mode = "auto";
};

void add_backend_flags(CLI::App* app, ServiceConfig& c) {
  app->add_option("--backend", c.backend, "Verifier backend")
      ->check(CLI::IsMember({"mock", "isabelle"}))
      ->capture_default_str();
  app->add_option("--space", c.space, "Synthetic space fixture (mock backend)");
  app->add_option("--proposer", c.proposer, "Proposer backend")
      ->check(CLI::IsMember({"scripted", "oracle", "http"}))
      ->capture_default_str();
  app->add_option("--proposer-url", c.proposer_url, "Completion endpoint (http proposer)")
      ->capture_default_str();
  app->add_option("--proposer-fixture", c.proposer_fixture, "Response table (scripted proposer)");
  app->add_option("--log-dir", c.log_dir, "Directory for runs.jsonl and attempts.jsonl");
  app->add_option("--model", c.model, "Reranker model file");
  app->add_option("--lexicon", c.lexicon, "Hint lexicon file");
  app->add_option("--premises", c.premises, "Premise corpus (JSONL)");
  app->add_option("--isabelle-host", c.isabelle.host, "Isabelle server host")->capture_default_str();
  app->add_option("--isabelle-port", c.isabelle.port, "Isabelle server port");
  app->add_option("--isabelle-password", c.isabelle.password, "Isabelle server password");
  app->add_option("--isabelle-session", c.isabelle.session, "Isabelle logic session")
      ->capture_default_str();
}

void add_run_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--goal", f.goal, "Goal proposition")->required();
  app->add_option("--budget", f.budget, "Wall-clock budget in seconds");
  app->add_option("--beam", f.beam, "Beam width");
  app->add_option("--depth", f.depth, "Maximum depth");
}

json request_of(const RunFlags& f) {
  json r = {{"goal", f.goal}};
  if (f.budget) r["budget"] = *f.budget;
  if (f.beam) r["beam"] = *f.beam;
  if (f.depth) r["depth"] = *f.depth;
  return r;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

std::vector<json> rows_of(const auto& items) {
  std::vector<json> rows;
  rows.reserve(items.size());
  for (const auto& it : items) rows.push_back(to_json(it));
  return rows;
}

int job_prove(ServiceConfig cfg, const RunFlags& f, std::ostream& out, std::ostream& err) {
  Service service(std::move(cfg));
  const ProofResult r = service.prove_goal(request_of(f));
  if (r.solved && r.script) out << r.script->render() << '\n';
  json stats = prove_stats(r);
  stats["solved"] = r.solved;
  err << stats.dump() << '\n';
  return r.solved ? kExitOk : kExitFailed;
}

int job_plan(ServiceConfig cfg, const RunFlags& f, std::ostream& out, std::ostream& err) {
  Service service(std::move(cfg));
  json request = request_of(f);
  request["mode"] = f.mode;
  const PlanJob job = service.plan_goal(request);
  if (job.result.script) out << job.result.script->render() << '\n';
  json stats = plan_stats(job.result);
  stats["ok"] = job.ok;
  stats["holes_remaining"] = job.result.script ? find_holes(*job.result.script).size() : 0;
  err << stats.dump() << '\n';
  return job.ok ? kExitOk : kExitFailed;
}

int job_serve(ServiceConfig cfg, std::ostream& err) {
  // SIGINT and SIGTERM are taken by sigwait below.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  Service service(std::move(cfg));
  service.start();
  err << "listening on " << service.config().host << ':' << service.port() << '\n';
  int sig = 0;
  sigwait(&set, &sig);
  service.stop();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verifier-in-the-loop proof search", "proofbeam"};
  app.require_subcommand(1);

  ServiceConfig svc;
  RunFlags run;

  auto* prove = app.add_subcommand("prove", "Stepwise beam search for one goal");
  add_run_flags(prove, run);
  add_backend_flags(prove, svc);

  auto* plan = app.add_subcommand("plan", "Plan, fill and repair a structured proof");
  add_run_flags(plan, run);
  add_backend_flags(plan, svc);
  plan->add_option("--mode", run.mode, "Planner mode")
      ->check(CLI::IsMember({"auto", "outline"}))
      ->capture_default_str();

  auto* outline = app.add_subcommand("outline", "Best-scored outline for one goal");
  add_run_flags(outline, run);
  add_backend_flags(outline, svc);

  auto* serve = app.add_subcommand("serve", "Local HTTP service");
  add_backend_flags(serve, svc);
  serve->add_option("--host", svc.host, "Bind address")->capture_default_str();
  serve->add_option("--port", svc.port, "Bind port")->capture_default_str();
  serve->add_flag("--allow-remote", svc.allow_remote, "Permit non-loopback binds");
  serve->add_option("--queue", svc.queue, "Requests allowed to wait")->capture_default_str();

  int gen_depth = 3, gen_branching = 2, gen_solutions = 1;
  std::uint64_t gen_seed = 0;
  std::string output;
  auto* gen = app.add_subcommand("gen-space", "Generate a synthetic proof space");
  gen->add_option("--depth", gen_depth)->capture_default_str();
  gen->add_option("--branching", gen_branching)->capture_default_str();
  gen->add_option("--solutions", gen_solutions)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("-o,--output", output, "Output file")->required();

  std::string corpus;
  auto* mine = app.add_subcommand("mine-lexicon", "Mine a hint lexicon from a goal/lemma corpus");
  mine->add_option("--corpus", corpus, "JSONL of {goal, lemmas}")->required()->check(CLI::ExistingFile);
  mine->add_option("-o,--output", output, "Output file")->required();

  std::string attempts, kind = "reranker", label = "binary";
  double beta = 1.0, gamma = 0.9;
  std::uint64_t seed = 0;
  auto* build = app.add_subcommand("build-dataset", "Build a training dataset from attempt logs");
  build->add_option("--attempts", attempts, "attempts.jsonl")->required()->check(CLI::ExistingFile);
  build->add_option("--kind", kind)
      ->check(CLI::IsMember({"reranker", "trajectories", "premises", "repairs"}))
      ->capture_default_str();
  build->add_option("--label", label)->check(CLI::IsMember({"binary", "q", "awr"}))->capture_default_str();
  build->add_option("--beta", beta, "AWR temperature")->capture_default_str();
  build->add_option("--seed", seed, "Negative sampling seed")->capture_default_str();
  build->add_option("-o,--output", output, "Output file, - for stdout")->capture_default_str();

  int iterations = 20, epochs = 300;
  double l2 = 1e-4;
  auto* train = app.add_subcommand("train-reranker", "Train a reranker from attempt logs");
  train->add_option("--attempts", attempts, "attempts.jsonl")->required()->check(CLI::ExistingFile);
  train->add_option("--label", label)->check(CLI::IsMember({"binary", "q", "awr"}))->capture_default_str();
  train->add_option("--beta", beta, "AWR temperature")->capture_default_str();
  train->add_option("--gamma", gamma, "Discount (q)")->capture_default_str();
  train->add_option("--iterations", iterations, "Fitted-Q iterations")->capture_default_str();
  train->add_option("--epochs", epochs)->capture_default_str();
  train->add_option("--l2", l2)->capture_default_str();
  train->add_option("-o,--output", output, "Model file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  try {
    if (prove->parsed()) return job_prove(svc, run, out, err);
    if (plan->parsed()) return job_plan(svc, run, out, err);
    if (outline->parsed()) {
      run.mode = "outline";
      return job_plan(svc, run, out, err);
    }
    if (serve->parsed()) return job_serve(svc, err);
    if (gen->parsed()) {
      generate_space(gen_depth, gen_branching, gen_solutions, gen_seed).save(output);
      return kExitOk;
    }
    if (mine->parsed()) {
      mine_lexicon(load_lexicon_corpus(corpus)).save(output);
      return kExitOk;
    }
    if (build->parsed()) {
      std::size_t skipped = 0;
      std::vector<json> rows;
      if (kind == "reranker") {
        const RerankerDataset d = build_reranker_dataset(attempts, parse_label_mode(label), beta);
        rows = d.mode == LabelMode::kQ ? rows_of(d.transitions) : rows_of(d.examples);
        skipped = d.skipped;
      } else if (kind == "trajectories") {
        for (const Episode& e : build_trajectories(attempts, &skipped)) {
          rows.push_back({{"run_id", e.run_id}, {"transitions", rows_of(e.transitions)}});
        }
      } else if (kind == "premises") {
        rows = rows_of(build_premise_dataset(attempts, seed, &skipped));
      } else {
        rows = rows_of(build_repair_dataset(attempts, &skipped));
      }
      write_text(output, to_jsonl(rows), out);
      err << json{{"rows", rows.size()}, {"skipped", skipped}}.dump() << '\n';
      return kExitOk;
    }
    if (train->parsed()) {
      const LabelMode mode = parse_label_mode(label);
      const RerankerDataset d = build_reranker_dataset(attempts, mode, beta);
      TrainOptions opts;
      opts.epochs = epochs;
      opts.l2 = l2;
      RerankModel model;
      if (mode == LabelMode::kBinary) {
        model = train_logistic(d.examples, opts);
      } else if (mode == LabelMode::kAwr) {
        model = train_awr(d.transitions, beta, opts);
      } else {
        model = train_fitted_q(d.transitions, gamma, iterations);
      }
      save_model(model, output);
      err << json{{"examples", d.examples.size()},
                  {"transitions", d.transitions.size()},
                  {"skipped", d.skipped},
                  {"degenerate", model.degenerate},
                  {"final_loss", model.final_loss}}
                 .dump()
          << '\n';
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return kExitUsage;
}

}  // namespace proofbeam
