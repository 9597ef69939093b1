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

#include <chrono>
#include <fstream>
#include <stdexcept>

#include "httplib.h"
#include "proofbeam/error.h"
#include "proofbeam/proposer_backends.h"
#include "proofbeam/text.h"

namespace proofbeam {

using json = nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path);
  return json::parse(in);
}

// Copies request fields onto a config document. `aliases` maps CLI flag names
// to config keys; a request key that names neither is ignored.
json overlay(json base, const json& request, const std::map<std::string, std::string>& aliases) {
  for (const auto& [key, value] : request.items()) {
    if (auto it = aliases.find(key); it != aliases.end()) {
      base[it->second] = value;
    } else if (base.contains(key)) {
      base[key] = value;
    }
  }
  return base;
}

const std::string& required_goal(const json& request) {
  if (!request.is_object() || !request.contains("goal") || !request["goal"].is_string() ||
      text::trim(request["goal"].get_ref<const std::string&>()).empty()) {
    throw std::invalid_argument("missing goal");
  }
  return request["goal"].get_ref<const std::string&>();
}

Reply error_reply(int status, const std::string& message) {
  return {status, json{{"ok", false}, {"error", message}}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void ServiceConfig::validate() const {
  if (backend != "mock" && backend != "isabelle") {
    throw std::invalid_argument("backend must be mock or isabelle");
  }
  if (proposer != "scripted" && proposer != "oracle" && proposer != "http") {
    throw std::invalid_argument("proposer must be scripted, oracle or http");
  }
  if (port < 0 || port > 65535) throw std::invalid_argument("port out of range");
  if (in_flight == 0) throw std::invalid_argument("in_flight must be positive");
  if (!allow_remote && !is_loopback(host)) {
    throw std::invalid_argument("non-loopback bind requires allow_remote");
  }
  search.validate();
  planner.validate();
}

bool is_loopback(std::string_view host) {
  return host == "localhost" || host == "::1" || host.starts_with("127.");
}

bool is_approved_command(std::string_view line) {
  return line.starts_with("apply ") || line.starts_with("by ") || line == "done";
}

std::vector<std::string> approved_commands(const ProofScript& script) {
  std::vector<std::string> out;
  for (const std::string& raw : script.lines()) {
    const std::string line = text::collapse_whitespace(raw);
    if (is_approved_command(line)) out.push_back(line);
  }
  return out;
}

// --- AdmissionGate -----------------------------------------------------------

bool AdmissionGate::enter() {
  std::unique_lock lock(mu_);
  if (running_ < slots_) {
    ++running_;
    return true;
  }
  if (waiting_ >= queue_) return false;
  ++waiting_;
  cv_.wait(lock, [&] { return running_ < slots_; });
  --waiting_;
  ++running_;
  return true;
}

void AdmissionGate::leave() {
  {
    std::lock_guard lock(mu_);
    --running_;
  }
  cv_.notify_one();
}

std::size_t AdmissionGate::running() const {
  std::lock_guard lock(mu_);
  return running_;
}

std::size_t AdmissionGate::waiting() const {
  std::lock_guard lock(mu_);
  return waiting_;
}

// --- factories ---------------------------------------------------------------

std::unique_ptr<VerifierBackend> make_backend(const ServiceConfig& config,
                                              std::unique_ptr<SyntheticSpace>& space) {
  if (!config.space.empty()) space = std::make_unique<SyntheticSpace>(SyntheticSpace::load(config.space));
  if (config.backend == "isabelle") return std::make_unique<isabelle::ServerBackend>(config.isabelle);
  if (!space) throw std::invalid_argument("mock backend needs --space");
  return std::make_unique<MockBackend>(*space);
}

std::unique_ptr<ProposerBackend> make_proposer(const std::string& kind, const ServiceConfig& config,
                                               const SyntheticSpace* space) {
  if (kind == "oracle") {
    if (space == nullptr) throw std::invalid_argument("oracle proposer needs --space");
    return std::make_unique<OracleProposer>(*space);
  }
  if (kind == "scripted") {
    if (config.proposer_fixture.empty()) {
      throw std::invalid_argument("scripted proposer needs --proposer-fixture");
    }
    return std::make_unique<ScriptedProposer>(read_json_file(config.proposer_fixture));
  }
  if (kind == "http") return std::make_unique<HttpProposer>(config.proposer_url);
  throw std::invalid_argument("unknown proposer " + kind);
}

// --- Service -----------------------------------------------------------------

Service::Service(ServiceConfig config)
    : config_(std::move(config)), gate_(config_.in_flight, config_.queue) {
  config_.validate();
  owned_backend_ = make_backend(config_, space_);
  backend_ = owned_backend_.get();
  session_inits_ = 1;
  for (const char* kind : {"oracle", "scripted", "http"}) {
    try {
      owned_proposers_.push_back(make_proposer(kind, config_, space_.get()));
      proposers_[kind] = owned_proposers_.back().get();
    } catch (const std::exception&) {
      if (config_.proposer == kind) throw;
    }
  }
  proposer_ = proposers_.at(config_.proposer);
  verifier_ = std::make_unique<Verifier>(*backend_, config_.search.step_timeout);
  load_artifacts();
}

Service::Service(ServiceConfig config, VerifierBackend& backend, ProposerBackend& proposer)
    : config_(std::move(config)), gate_(config_.in_flight, config_.queue) {
  config_.validate();
  backend_ = &backend;
  proposer_ = &proposer;
  proposers_[config_.proposer] = &proposer;
  session_inits_ = 1;
  verifier_ = std::make_unique<Verifier>(*backend_, config_.search.step_timeout);
  load_artifacts();
}

Service::~Service() { stop(); }

void Service::load_artifacts() {
  if (!config_.model.empty()) model_ = load_model(config_.model);
  if (!config_.lexicon.empty()) lexicon_ = HintLexicon::load(config_.lexicon);
  if (!config_.premises.empty()) premises_ = PremiseIndex::load_jsonl(config_.premises);
  if (!config_.log_dir.empty()) {
    file_sink_ = std::make_unique<JsonlSink>(config_.log_dir);
    sink_ = file_sink_.get();
  }
}

SearchConfig Service::merged_search(const json& request) const {
  static const std::map<std::string, std::string> kAliases = {
      {"budget", "budget_s"}, {"beam", "beam_width"}, {"depth", "max_depth"}};
  SearchConfig cfg = SearchConfig::from_json(overlay(config_.search.to_json(), request, kAliases));
  cfg.validate();
  return cfg;
}

PlannerConfig Service::merged_planner(const json& request) const {
  static const std::map<std::string, std::string> kAliases = {
      {"budget", "budget_s"}, {"beam", "fill_beam"}, {"depth", "fill_depth"}};
  PlannerConfig cfg = PlannerConfig::from_json(overlay(config_.planner.to_json(), request, kAliases));
  cfg.validate();
  return cfg;
}

ProposerBackend& Service::proposer_for(const json& request) {
  if (!request.contains("proposer")) return *proposer_;
  if (!request["proposer"].is_string()) throw std::invalid_argument("proposer must be a string");
  const std::string kind = request["proposer"].get<std::string>();
  auto it = proposers_.find(kind);
  if (it == proposers_.end()) throw std::invalid_argument("proposer unavailable: " + kind);
  return *it->second;
}

void Service::log_run(RunRecord record) {
  record.timestamp_ms = now_utc_ms();
  sink_->log_run(record);
  sink_->flush();
}

Reply Service::guarded(const char* mode, const json& request,
                       Reply (Service::*handler)(const json&)) {
  ++requests_;
  if (!gate_.enter()) return error_reply(503, "queue full");
  struct Leave {
    AdmissionGate& g;
    ~Leave() { g.leave(); }
  } leave{gate_};
  try {
    return (this->*handler)(request);
  } catch (const std::invalid_argument& e) {
    return error_reply(400, e.what());
  } catch (const json::exception& e) {
    return error_reply(400, e.what());
  } catch (const BackendDown& e) {
    ++crashes_;
    try {
      verifier_->restart();
    } catch (const std::exception&) {
      // The next request retries the restart.
    }
    return error_reply(503, std::string(mode) + ": backend crashed: " + e.what());
  } catch (const std::exception& e) {
    return error_reply(500, std::string(mode) + ": " + e.what());
  } catch (...) {
    return error_reply(500, std::string(mode) + ": unknown failure");
  }
}

Reply Service::handle_prove(const json& request) {
  return guarded("prove", request, &Service::run_prove);
}

Reply Service::handle_plan(const json& request) {
  return guarded("plan", request, &Service::run_plan);
}

json prove_stats(const ProofResult& r) {
  return {{"depth_reached", r.depth_reached},   {"expansions", r.expansions},
          {"verifier_calls", r.verifier_calls}, {"refute_calls", r.refute_calls},
          {"timed_out", r.timed_out},           {"rounds", r.rounds.size()},
          {"elapsed", r.elapsed_s}};
}

json plan_stats(const PlanResult& r) {
  return {{"outlines_sampled", r.outlines_sampled}, {"fills_attempted", r.fills_attempted},
          {"repairs_attempted", r.repairs_attempted}, {"regenerations", r.regenerations},
          {"banned_skips", r.banned_skips},           {"iterations", r.iterations},
          {"timed_out", r.timed_out},                 {"stalled", r.stalled},
          {"elapsed", r.elapsed_s}};
}

ProofResult Service::prove_goal(const json& request) {
  const std::string goal = required_goal(request);
  const SearchConfig cfg = merged_search(request);
  ProposerBackend& proposer = proposer_for(request);
  RunLogger logger(*sink_, new_run_id());
  SearchDeps deps;
  deps.verifier = verifier_.get();
  deps.proposer = &proposer;
  deps.reranker = model_ ? &*model_ : nullptr;
  deps.premises = premises_ ? &*premises_ : nullptr;
  deps.global_cache = &cache_;
  deps.logger = &logger;
  ProofResult r = prove(goal, cfg, deps);

  RunRecord run;
  run.run_id = logger.run_id();
  run.goal = goal;
  run.mode = "prove";
  run.config = cfg.to_json();
  run.proposer = proposer.name();
  run.reranker = model_ ? to_string(model_->kind) : "none";
  run.premise_backend =
      premises_ ? (cfg.premise_backend == RetrievalBackend::kTfidf ? "tfidf" : "overlap") : "none";
  run.runtime_s = r.elapsed_s;
  run.timed_out = r.timed_out;
  run.success = r.solved;
  if (r.solved && r.script) run.proof = r.script->render();
  run.stats = prove_stats(r);
  log_run(std::move(run));
  return r;
}

PlanJob Service::plan_goal(const json& request) {
  const std::string goal = required_goal(request);
  PlanJob job;
  job.config = merged_planner(request);
  ProposerBackend& proposer = proposer_for(request);
  RunLogger logger(*sink_, new_run_id());
  PlannerDeps deps;
  deps.verifier = verifier_.get();
  deps.proposer = &proposer;
  deps.step_proposer = &proposer;
  deps.reranker = model_ ? &*model_ : nullptr;
  deps.premises = premises_ ? &*premises_ : nullptr;
  deps.lexicon = lexicon_ ? &*lexicon_ : nullptr;
  deps.global_cache = &cache_;
  deps.logger = &logger;
  const auto t0 = std::chrono::steady_clock::now();
  job.result = Planner(goal, job.config, deps).run();
  job.elapsed_s = seconds_since(t0);
  const PlanResult& r = job.result;
  job.ok = job.config.mode == PlannerMode::kOutline ? !r.outlines.empty() : r.solved;

  RunRecord run;
  run.run_id = logger.run_id();
  run.goal = goal;
  run.mode = std::string(to_string(job.config.mode));
  run.config = job.config.to_json();
  run.proposer = proposer.name();
  run.reranker = model_ ? to_string(model_->kind) : "none";
  run.premise_backend = premises_ ? "tfidf" : "none";
  run.runtime_s = job.elapsed_s;
  run.timed_out = r.timed_out;
  run.success = job.ok;
  if (r.script) run.proof = r.script->render();
  run.stats = plan_stats(r);
  log_run(std::move(run));
  return job;
}

Reply Service::run_prove(const json& request) {
  const auto t0 = std::chrono::steady_clock::now();
  const ProofResult r = prove_goal(request);
  json commands = json::array();
  if (r.solved && r.script) {
    for (auto& c : approved_commands(*r.script)) commands.push_back(std::move(c));
  }
  return {200, json{{"ok", r.solved},
                    {"commands", commands},
                    {"elapsed", seconds_since(t0)},
                    {"stats", prove_stats(r)}}};
}

Reply Service::run_plan(const json& request) {
  const PlanJob job = plan_goal(request);
  const PlanResult& r = job.result;
  const std::string script = r.script ? r.script->render() : std::string();
  const int holes = r.script ? static_cast<int>(find_holes(*r.script).size()) : 0;
  return {200, json{{"ok", job.ok},
                    {"script", script},
                    {"holes_remaining", holes},
                    {"stats", plan_stats(r)}}};
}

Reply Service::handle_health() const {
  return {200, json{{"ok", true},
                    {"backend", backend_->name()},
                    {"session_inits", session_inits_.load()},
                    {"restarts", verifier_->restarts()},
                    {"crashes_survived", crashes_.load()},
                    {"running", gate_.running()},
                    {"waiting", gate_.waiting()},
                    {"requests", requests_.load()}}};
}

void Service::bind() {
  if (!config_.allow_remote && !is_loopback(config_.host)) {
    throw BindFailure("refusing non-loopback bind to " + config_.host);
  }
  server_ = std::make_unique<httplib::Server>();
  // No SO_REUSEPORT: a second server on a taken port must fail to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
  });
  auto respond = [](httplib::Response& res, const Reply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  auto parse = [](const httplib::Request& req) {
    return json::parse(req.body, nullptr, /*allow_exceptions=*/false);
  };
  server_->Post("/prove", [this, respond, parse](const httplib::Request& req, httplib::Response& res) {
    const json body = parse(req);
    respond(res, body.is_discarded() ? error_reply(400, "body is not JSON") : handle_prove(body));
  });
  server_->Post("/plan", [this, respond, parse](const httplib::Request& req, httplib::Response& res) {
    const json body = parse(req);
    respond(res, body.is_discarded() ? error_reply(400, "body is not JSON") : handle_plan(body));
  });
  server_->Get("/health", [this, respond](const httplib::Request&, httplib::Response& res) {
    respond(res, handle_health());
  });
  server_->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    res.status = 500;
    res.set_content(R"({"ok":false,"error":"internal error"})", "application/json");
  });
  if (config_.port == 0) {
    bound_port_ = server_->bind_to_any_port(config_.host);
    if (bound_port_ <= 0) throw BindFailure("cannot bind " + config_.host);
  } else {
    if (!server_->bind_to_port(config_.host, config_.port)) {
      throw BindFailure("cannot bind " + config_.host + ":" + std::to_string(config_.port));
    }
    bound_port_ = config_.port;
  }
}

void Service::start() {
  bind();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void Service::serve() {
  bind();
  server_->listen_after_bind();
}

void Service::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace proofbeam
