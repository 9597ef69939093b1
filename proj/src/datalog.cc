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

#include "proofbeam/datalog.h"

#include <chrono>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "proofbeam/error.h"

namespace proofbeam {

using nlohmann::json;

std::int64_t now_utc_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

namespace {

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
void get_opt(const json& j, const char* key, std::optional<T>& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

void keep_unknown(const json& j, const std::set<std::string>& known, json& extra) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) extra[it.key()] = it.value();
  }
}

const std::set<std::string> kAttemptKeys = {
    "v",           "run_id",         "seq",        "type",         "goal",
    "prefix_fp",   "action",         "success",    "subgoals_before", "subgoals_after",
    "elapsed_ms",  "cache_hit",      "depth",      "stage",        "features",
    "pool",        "hints_used",     "block_kind", "tag",          "hid",
    "order_key",   "reranker_score", "result_fp",  "effective_goal", "counterexamples",
    "candidate_fp", "verdict",       "ban_size",   "ts"};

const std::set<std::string> kRunKeys = {"v",        "run_id",   "goal_id",         "goal",
                                        "mode",     "config",   "proposer",        "reranker",
                                        "premise_backend", "runtime_s", "timed_out", "success",
                                        "proof",    "stats",    "ts"};

}  // namespace

json to_json(const AttemptRecord& r) {
  json j = r.extra.is_object() ? r.extra : json::object();
  j["v"] = kLogSchemaVersion;
  j["run_id"] = r.run_id;
  j["seq"] = r.seq;
  j["type"] = r.type;
  j["goal"] = r.goal;
  j["prefix_fp"] = r.prefix_fp;
  j["action"] = r.action;
  j["success"] = r.success;
  put_opt(j, "subgoals_before", r.subgoals_before);
  put_opt(j, "subgoals_after", r.subgoals_after);
  j["elapsed_ms"] = r.elapsed_ms;
  j["cache_hit"] = r.cache_hit;
  j["depth"] = r.depth;
  put_opt(j, "stage", r.stage);
  j["features"] = r.features;
  j["pool"] = r.pool;
  j["hints_used"] = r.hints_used;
  put_opt(j, "block_kind", r.block_kind);
  put_opt(j, "tag", r.tag);
  put_opt(j, "hid", r.hid);
  put_opt(j, "order_key", r.order_key);
  put_opt(j, "reranker_score", r.reranker_score);
  put_opt(j, "result_fp", r.result_fp);
  put_opt(j, "effective_goal", r.effective_goal);
  if (!r.counterexamples.empty()) j["counterexamples"] = r.counterexamples;
  put_opt(j, "candidate_fp", r.candidate_fp);
  put_opt(j, "verdict", r.verdict);
  put_opt(j, "ban_size", r.ban_size);
  j["ts"] = r.timestamp_ms;
  return j;
}

AttemptRecord attempt_from_json(const json& j) {
  AttemptRecord r;
  try {
    if (!j.is_object()) throw MalformedRecord("attempt record is not an object");
    if (j.value("v", 0) != kLogSchemaVersion) throw MalformedRecord("unsupported record version");
    r.run_id = j.at("run_id").get<std::string>();
    r.seq = j.at("seq").get<std::int64_t>();
    r.type = j.at("type").get<std::string>();
    r.goal = j.value("goal", "");
    r.prefix_fp = j.value("prefix_fp", "");
    r.action = j.value("action", "");
    r.success = j.at("success").get<bool>();
    get_opt(j, "subgoals_before", r.subgoals_before);
    get_opt(j, "subgoals_after", r.subgoals_after);
    r.elapsed_ms = j.value("elapsed_ms", 0.0);
    r.cache_hit = j.value("cache_hit", false);
    r.depth = j.value("depth", 0);
    get_opt(j, "stage", r.stage);
    r.features = j.value("features", std::vector<double>{});
    r.pool = j.value("pool", std::vector<std::string>{});
    r.hints_used = j.value("hints_used", std::vector<std::string>{});
    get_opt(j, "block_kind", r.block_kind);
    get_opt(j, "tag", r.tag);
    get_opt(j, "hid", r.hid);
    get_opt(j, "order_key", r.order_key);
    get_opt(j, "reranker_score", r.reranker_score);
    get_opt(j, "result_fp", r.result_fp);
    get_opt(j, "effective_goal", r.effective_goal);
    r.counterexamples = j.value("counterexamples", std::vector<std::string>{});
    get_opt(j, "candidate_fp", r.candidate_fp);
    get_opt(j, "verdict", r.verdict);
    get_opt(j, "ban_size", r.ban_size);
    r.timestamp_ms = j.value("ts", std::int64_t{0});
    keep_unknown(j, kAttemptKeys, r.extra);
  } catch (const json::exception& e) {
    throw MalformedRecord(std::string("bad attempt record: ") + e.what());
  }
  return r;
}

json to_json(const RunRecord& r) {
  json j = r.extra.is_object() ? r.extra : json::object();
  j["v"] = kLogSchemaVersion;
  j["run_id"] = r.run_id;
  j["goal_id"] = r.goal_id;
  j["goal"] = r.goal;
  j["mode"] = r.mode;
  j["config"] = r.config;
  j["proposer"] = r.proposer;
  j["reranker"] = r.reranker;
  j["premise_backend"] = r.premise_backend;
  j["runtime_s"] = r.runtime_s;
  j["timed_out"] = r.timed_out;
  j["success"] = r.success;
  put_opt(j, "proof", r.proof);
  j["stats"] = r.stats;
  j["ts"] = r.timestamp_ms;
  return j;
}

RunRecord run_from_json(const json& j) {
  RunRecord r;
  try {
    if (!j.is_object()) throw MalformedRecord("run record is not an object");
    if (j.value("v", 0) != kLogSchemaVersion) throw MalformedRecord("unsupported record version");
    r.run_id = j.at("run_id").get<std::string>();
    r.goal_id = j.value("goal_id", "");
    r.goal = j.at("goal").get<std::string>();
    r.mode = j.value("mode", "");
    r.config = j.value("config", json::object());
    r.proposer = j.value("proposer", "");
    r.reranker = j.value("reranker", "");
    r.premise_backend = j.value("premise_backend", "");
    r.runtime_s = j.value("runtime_s", 0.0);
    r.timed_out = j.value("timed_out", false);
    r.success = j.at("success").get<bool>();
    get_opt(j, "proof", r.proof);
    r.stats = j.value("stats", json::object());
    r.timestamp_ms = j.value("ts", std::int64_t{0});
    keep_unknown(j, kRunKeys, r.extra);
  } catch (const json::exception& e) {
    throw MalformedRecord(std::string("bad run record: ") + e.what());
  }
  if (r.success && !r.proof) throw MalformedRecord("successful run without proof text");
  return r;
}

// --- sinks -------------------------------------------------------------------

void MemorySink::log_run(const RunRecord& record) {
  std::lock_guard lock(mu_);
  runs_.push_back(record);
}

void MemorySink::log_attempt(const AttemptRecord& record) {
  std::lock_guard lock(mu_);
  attempts_.push_back(record);
}

std::vector<RunRecord> MemorySink::runs() const {
  std::lock_guard lock(mu_);
  return runs_;
}

std::vector<AttemptRecord> MemorySink::attempts() const {
  std::lock_guard lock(mu_);
  return attempts_;
}

std::vector<AttemptRecord> MemorySink::attempts_for(const std::string& run_id) const {
  std::lock_guard lock(mu_);
  std::vector<AttemptRecord> out;
  for (const auto& a : attempts_) {
    if (a.run_id == run_id) out.push_back(a);
  }
  return out;
}

JsonlSink::JsonlSink(const std::string& dir) : dir_(dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  runs_.open(dir + "/runs.jsonl", std::ios::app);
  attempts_.open(dir + "/attempts.jsonl", std::ios::app);
  if (!runs_ || !attempts_) throw SinkUnavailable("cannot open log files under " + dir);
}

void JsonlSink::append(std::ofstream& out, const json& j) {
  const std::string line = j.dump() + "\n";
  std::lock_guard lock(mu_);
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  if (!out) throw SinkUnavailable("write to log failed under " + dir_);
}

void JsonlSink::log_run(const RunRecord& record) {
  append(runs_, to_json(record));
  flush();
}

void JsonlSink::log_attempt(const AttemptRecord& record) { append(attempts_, to_json(record)); }

void JsonlSink::flush() {
  std::lock_guard lock(mu_);
  runs_.flush();
  attempts_.flush();
}

void RunLogger::attempt(AttemptRecord record) {
  {
    std::lock_guard lock(mu_);
    record.seq = next_seq_++;
  }
  record.run_id = run_id_;
  if (record.timestamp_ms == 0) record.timestamp_ms = now_utc_ms();
  sink_.log_attempt(record);
}

void RunLogger::run(RunRecord record) {
  record.run_id = run_id_;
  if (record.timestamp_ms == 0) record.timestamp_ms = now_utc_ms();
  sink_.log_run(record);
  sink_.flush();
}

std::int64_t RunLogger::attempts_logged() const {
  std::lock_guard lock(mu_);
  return next_seq_;
}

std::string new_run_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  std::ostringstream os;
  os << std::hex << now_utc_ms() << '-' << (rng() & 0xffffffffULL);
  return os.str();
}

// --- reading -----------------------------------------------------------------

ReadResult read_attempts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SinkUnavailable("cannot read " + path);
  ReadResult out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.attempts.push_back(attempt_from_json(json::parse(line)));
    } catch (const json::exception&) {
      ++out.skipped;
    } catch (const MalformedRecord&) {
      ++out.skipped;
    }
  }
  return out;
}

std::vector<RunRecord> read_runs(const std::string& path, std::size_t* skipped) {
  std::ifstream in(path);
  if (!in) throw SinkUnavailable("cannot read " + path);
  std::vector<RunRecord> out;
  std::size_t bad = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(run_from_json(json::parse(line)));
    } catch (const json::exception&) {
      ++bad;
    } catch (const MalformedRecord&) {
      ++bad;
    }
  }
  if (skipped) *skipped = bad;
  return out;
}

}  // namespace proofbeam
