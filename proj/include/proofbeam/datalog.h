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

#ifndef PROOFBEAM_DATALOG_H_
#define PROOFBEAM_DATALOG_H_

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace proofbeam {

inline constexpr int kLogSchemaVersion = 1;

std::int64_t now_utc_ms();

// Attempt types. `outline`, `probe`, `normalize` and `minimise` cover
// verifier evaluations that are not search or repair actions.
namespace attempt_type {
inline constexpr const char* kStep = "step";
inline constexpr const char* kFinisher = "finisher";
inline constexpr const char* kFill = "fill";
inline constexpr const char* kRepair = "repair";
inline constexpr const char* kRegeneration = "regeneration";
inline constexpr const char* kOutline = "outline";
inline constexpr const char* kProbe = "probe";
inline constexpr const char* kNormalize = "normalize";
inline constexpr const char* kMinimise = "minimise";
}  // namespace attempt_type

struct AttemptRecord {
  std::string run_id;
  std::int64_t seq = 0;
  std::string type;
  std::string goal;
  std::string prefix_fp;  // state fingerprint of the joined prefix
  std::string action;
  bool success = false;
  std::optional<int> subgoals_before;
  std::optional<int> subgoals_after;
  double elapsed_ms = 0.0;
  bool cache_hit = false;
  int depth = 0;
  std::optional<int> stage;
  std::vector<double> features;
  std::vector<std::string> pool;
  std::vector<std::string> hints_used;
  std::optional<std::string> block_kind;
  std::optional<std::string> tag;
  std::optional<std::string> hid;
  std::optional<double> order_key;       // reranker-adjusted ordering key
  std::optional<double> reranker_score;  // raw f(x)
  std::optional<std::string> result_fp;  // state fingerprint after the step
  std::optional<std::string> effective_goal;
  std::vector<std::string> counterexamples;
  std::optional<std::string> candidate_fp;
  std::optional<std::string> verdict;  // verified | partial | rejected | banned
  std::optional<int> ban_size;
  std::int64_t timestamp_ms = 0;
  nlohmann::json extra = nlohmann::json::object();  // unknown fields, kept on read

  bool operator==(const AttemptRecord&) const = default;
};

struct RunRecord {
  std::string run_id;
  std::string goal_id;
  std::string goal;
  std::string mode;  // prove | outline | auto
  nlohmann::json config = nlohmann::json::object();
  std::string proposer;
  std::string reranker;
  std::string premise_backend;
  double runtime_s = 0.0;
  bool timed_out = false;
  bool success = false;
  std::optional<std::string> proof;
  nlohmann::json stats = nlohmann::json::object();
  std::int64_t timestamp_ms = 0;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const RunRecord&) const = default;
};

nlohmann::json to_json(const AttemptRecord& r);
nlohmann::json to_json(const RunRecord& r);
// Both throw MalformedRecord.
AttemptRecord attempt_from_json(const nlohmann::json& j);
RunRecord run_from_json(const nlohmann::json& j);

class LogSink {
 public:
  virtual ~LogSink() = default;
  virtual void log_run(const RunRecord& record) = 0;
  virtual void log_attempt(const AttemptRecord& record) = 0;
  virtual void flush() {}
};

class NullSink : public LogSink {
 public:
  void log_run(const RunRecord&) override {}
  void log_attempt(const AttemptRecord&) override {}
};

// Keeps records in memory; used by tests and the service.
class MemorySink : public LogSink {
 public:
  void log_run(const RunRecord& record) override;
  void log_attempt(const AttemptRecord& record) override;
  std::vector<RunRecord> runs() const;
  std::vector<AttemptRecord> attempts() const;
  std::vector<AttemptRecord> attempts_for(const std::string& run_id) const;

 private:
  mutable std::mutex mu_;
  std::vector<RunRecord> runs_;
  std::vector<AttemptRecord> attempts_;
};

// Appends to <dir>/runs.jsonl and <dir>/attempts.jsonl. Each record is written
// as one complete line under a lock, so concurrent writers never interleave.
class JsonlSink : public LogSink {
 public:
  // Throws SinkUnavailable.
  explicit JsonlSink(const std::string& dir);

  void log_run(const RunRecord& record) override;
  void log_attempt(const AttemptRecord& record) override;
  void flush() override;

  const std::string& dir() const { return dir_; }

 private:
  void append(std::ofstream& out, const nlohmann::json& j);

  std::string dir_;
  std::mutex mu_;
  std::ofstream runs_;
  std::ofstream attempts_;
};

// Fans out to two sinks.
class TeeSink : public LogSink {
 public:
  TeeSink(LogSink& a, LogSink& b) : a_(a), b_(b) {}
  void log_run(const RunRecord& r) override {
    a_.log_run(r);
    b_.log_run(r);
  }
  void log_attempt(const AttemptRecord& r) override {
    a_.log_attempt(r);
    b_.log_attempt(r);
  }
  void flush() override {
    a_.flush();
    b_.flush();
  }

 private:
  LogSink& a_;
  LogSink& b_;
};

// Issues per-run sequence numbers and stamps records.
class RunLogger {
 public:
  RunLogger(LogSink& sink, std::string run_id) : sink_(sink), run_id_(std::move(run_id)) {}

  void attempt(AttemptRecord record);
  void run(RunRecord record);
  const std::string& run_id() const { return run_id_; }
  std::int64_t attempts_logged() const;

 private:
  LogSink& sink_;
  std::string run_id_;
  mutable std::mutex mu_;
  std::int64_t next_seq_ = 0;
};

std::string new_run_id();

// --- reading and dataset builders ------------------------------------------

struct ReadResult {
  std::vector<AttemptRecord> attempts;
  std::size_t skipped = 0;
};

ReadResult read_attempts(const std::string& path);
std::vector<RunRecord> read_runs(const std::string& path, std::size_t* skipped = nullptr);

}  // namespace proofbeam

#endif  // PROOFBEAM_DATALOG_H_
