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

#ifndef PROOFBEAM_SERVICE_H_
#define PROOFBEAM_SERVICE_H_

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"
#include "proofbeam/datalog.h"
#include "proofbeam/hints.h"
#include "proofbeam/isabelle.h"
#include "proofbeam/mock_backend.h"
#include "proofbeam/planner.h"
#include "proofbeam/premises.h"
#include "proofbeam/proposer.h"
#include "proofbeam/rerank.h"
#include "proofbeam/stepwise.h"
#include "proofbeam/verifier.h"

namespace httplib {
class Server;
}

namespace proofbeam {

inline constexpr int kDefaultPort = 8642;
inline constexpr std::size_t kDefaultQueue = 4;

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = kDefaultPort;
  bool allow_remote = false;
  std::string backend = "mock";  // mock | isabelle
  std::string space;             // mock fixture path
  isabelle::ServerConfig isabelle;
  std::string proposer = "oracle";  // scripted | oracle | http
  std::string proposer_url = "http://127.0.0.1:8000/v1/completions";
  std::string proposer_fixture;  // scripted proposer table
  SearchConfig search;
  PlannerConfig planner;
  std::string log_dir;
  std::string model;
  std::string lexicon;
  std::string premises;
  std::size_t queue = kDefaultQueue;  // requests allowed to wait
  std::size_t in_flight = 1;          // concurrent prove/plan runs

  // Throws std::invalid_argument.
  void validate() const;
};

// True for 127.0.0.0/8, ::1 and localhost.
bool is_loopback(std::string_view host);

// `apply ...`, `by ...` and `done` lines of a script, trimmed.
std::vector<std::string> approved_commands(const ProofScript& script);
bool is_approved_command(std::string_view line);

struct PlanJob {
  PlannerConfig config;
  PlanResult result;
  bool ok = false;  // outline: any outline produced; auto: solved
  double elapsed_s = 0.0;
};

nlohmann::json prove_stats(const ProofResult& r);
nlohmann::json plan_stats(const PlanResult& r);

struct Reply {
  int status = 200;
  nlohmann::json body;
};

// Admits at most `in_flight` holders, with up to `queue` more waiting.
class AdmissionGate {
 public:
  AdmissionGate(std::size_t in_flight, std::size_t queue) : slots_(in_flight), queue_(queue) {}

  // False when the queue is full.
  bool enter();
  void leave();
  std::size_t running() const;
  std::size_t waiting() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t slots_;
  std::size_t queue_;
  std::size_t running_ = 0;
  std::size_t waiting_ = 0;
};

// Shared state behind the CLI jobs and the HTTP endpoints. The backend
// session is created once and reused; crashes restart it.
class Service {
 public:
  // Builds backend, proposer and optional artifacts from `config`.
  explicit Service(ServiceConfig config);
  // Uses caller-owned backend and proposer; artifacts still come from config.
  Service(ServiceConfig config, VerifierBackend& backend, ProposerBackend& proposer);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Reply handle_prove(const nlohmann::json& request);
  Reply handle_plan(const nlohmann::json& request);
  Reply handle_health() const;

  // The jobs behind /prove and /plan; both log a run record. Throw
  // std::invalid_argument on bad requests.
  ProofResult prove_goal(const nlohmann::json& request);
  PlanJob plan_goal(const nlohmann::json& request);

  // Request fields override config defaults; throws std::invalid_argument.
  SearchConfig merged_search(const nlohmann::json& request) const;
  PlannerConfig merged_planner(const nlohmann::json& request) const;

  // Binds and serves on a background thread. Throws BindFailure.
  void start();
  void stop();
  // Blocks until stop() from another thread.
  void serve();
  int port() const { return bound_port_; }

  const ServiceConfig& config() const { return config_; }
  Verifier& verifier() { return *verifier_; }
  // Records of every run when no log directory is configured.
  MemorySink& memory_log() { return memory_; }
  std::uint64_t session_inits() const { return session_inits_.load(); }
  std::uint64_t crashes_survived() const { return crashes_.load(); }

 private:
  void load_artifacts();
  void bind();
  Reply guarded(const char* mode, const nlohmann::json& request,
                Reply (Service::*handler)(const nlohmann::json&));
  Reply run_prove(const nlohmann::json& request);
  Reply run_plan(const nlohmann::json& request);
  ProposerBackend& proposer_for(const nlohmann::json& request);
  void log_run(RunRecord record);

  ServiceConfig config_;
  std::unique_ptr<SyntheticSpace> space_;
  std::unique_ptr<VerifierBackend> owned_backend_;
  std::vector<std::unique_ptr<ProposerBackend>> owned_proposers_;
  std::map<std::string, ProposerBackend*> proposers_;
  VerifierBackend* backend_ = nullptr;
  ProposerBackend* proposer_ = nullptr;
  std::unique_ptr<Verifier> verifier_;
  GlobalCache cache_;
  std::optional<RerankModel> model_;
  std::optional<HintLexicon> lexicon_;
  std::optional<PremiseIndex> premises_;
  MemorySink memory_;
  std::unique_ptr<LogSink> file_sink_;
  LogSink* sink_ = &memory_;
  AdmissionGate gate_;
  std::atomic<std::uint64_t> session_inits_{0};
  std::atomic<std::uint64_t> crashes_{0};
  std::atomic<std::uint64_t> requests_{0};
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int bound_port_ = 0;
};

// Backend and proposer factories shared with the CLI.
std::unique_ptr<VerifierBackend> make_backend(const ServiceConfig& config,
                                              std::unique_ptr<SyntheticSpace>& space);
std::unique_ptr<ProposerBackend> make_proposer(const std::string& kind, const ServiceConfig& config,
                                               const SyntheticSpace* space);

}  // namespace proofbeam

#endif  // PROOFBEAM_SERVICE_H_
