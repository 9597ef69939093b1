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

#ifndef PROOFBEAM_VERIFIER_H_
#define PROOFBEAM_VERIFIER_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "proofbeam/error.h"
#include "proofbeam/script.h"

namespace proofbeam {

using Millis = std::chrono::milliseconds;

struct LineError {
  std::size_t line = 0;
  std::string message;

  bool operator==(const LineError&) const = default;
};

// Verdict of one verifier evaluation.
struct CheckResult {
  bool success = false;
  std::optional<int> subgoals;
  std::string state_hint;
  std::vector<LineError> errors;  // script line indices
  double elapsed_ms = 0.0;
  bool cache_hit = false;
  bool timed_out = false;

  // Equality on everything except cache_hit and elapsed_ms.
  bool same_payload(const CheckResult& other) const;
};

struct CounterexampleReport {
  std::vector<std::pair<std::string, std::string>> bindings;
  std::string source;  // quickcheck_like | nitpick_like | mock
};

// What a backend reports for one theory. Error lines index theory lines.
struct RawOutcome {
  bool ok = false;
  std::string state_text;
  std::vector<LineError> errors;
  bool timed_out = false;
};

// The proof checker. check_theory may throw BackendDown; the owner is then
// expected to call restart().
class VerifierBackend {
 public:
  virtual ~VerifierBackend() = default;

  virtual RawOutcome check_theory(std::string_view theory, Millis timeout) = 0;
  virtual void restart() = 0;
  virtual std::optional<CounterexampleReport> refute(std::string_view goal_or_state,
                                                     Millis timeout) = 0;
  virtual std::string name() const = 0;

  // Backends that cannot take concurrent calls return true; Verifier then
  // serializes access.
  virtual bool requires_serialization() const { return false; }
};

enum class CheckMode { kStep, kFinish };

inline constexpr std::string_view kTheoryHeader = "theory Scratch imports Main begin";

// theory header, prefix, candidate, then `print_state`/`sorry` in step mode,
// then `end`. Throws std::invalid_argument when prefix[0] is not a lemma.
std::string assemble_theory(const std::vector<std::string>& prefix, std::string_view candidate,
                            CheckMode mode);

// Runs the prefix and prints the state: prefix, `print_state`, `sorry`, `end`.
std::string assemble_probe(const std::vector<std::string>& prefix);

// The whole script with nothing appended.
std::string assemble_full(const ProofScript& script);

// `goal (N subgoals):`, `goal (1 subgoal):`, `No subgoals!` -> 0.
std::optional<int> parse_subgoal_count(std::string_view state_hint);

// Text of subgoal 1 in a state printout (` 1. <text>`).
std::optional<std::string> first_subgoal(std::string_view state_hint);

// Bounded LRU cache shared across runs. Thread-safe.
class GlobalCache {
 public:
  static constexpr std::size_t kDefaultCapacity = 50'000;

  explicit GlobalCache(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {}

  std::optional<CheckResult> get(const std::string& key);
  void put(const std::string& key, const CheckResult& value);
  bool contains(const std::string& key) const;
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  void clear();

 private:
  using Entry = std::pair<std::string, CheckResult>;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::list<Entry> order_;  // most recent first
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
};

// Per-run cache plus an optional handle on the shared global one.
struct StepCache {
  std::unordered_map<std::string, CheckResult> per_run;
  GlobalCache* global = nullptr;
};

std::string step_cache_key(const std::vector<std::string>& prefix, std::string_view candidate,
                           CheckMode mode);

// Facade over a backend: caching, error-line mapping, optional serialization
// and call counters. Every public check counts as one evaluation.
class Verifier {
 public:
  explicit Verifier(VerifierBackend& backend, Millis default_timeout = Millis(30'000));

  CheckResult check_step(StepCache& cache, const std::vector<std::string>& prefix,
                         std::string_view candidate, CheckMode mode,
                         std::optional<Millis> timeout = std::nullopt);

  // Full script as a theory; holes are accepted.
  CheckResult check_script(const ProofScript& script, std::optional<Millis> timeout = std::nullopt);

  // check_script, but success additionally requires a hole-free script.
  CheckResult verify_full(const ProofScript& script, std::optional<Millis> timeout = std::nullopt);

  // State printout after running `prefix`. Errors raised past the prefix are
  // dropped, so a prefix ending inside an open block still probes.
  CheckResult probe(const std::vector<std::string>& prefix,
                    std::optional<Millis> timeout = std::nullopt);

  // Timeouts and backend failures both yield no report.
  std::optional<CounterexampleReport> refute(std::string_view goal_or_state,
                                             std::optional<Millis> timeout = std::nullopt);

  void restart();

  VerifierBackend& backend() { return backend_; }
  Millis default_timeout() const { return default_timeout_; }

  std::uint64_t evaluations() const { return evaluations_.load(); }
  std::uint64_t backend_calls() const { return backend_calls_.load(); }
  std::uint64_t refute_calls() const { return refute_calls_.load(); }
  std::uint64_t restarts() const { return restarts_.load(); }

 private:
  CheckResult run(std::string_view theory, std::size_t line_offset, std::size_t max_line,
                  Millis timeout);

  VerifierBackend& backend_;
  Millis default_timeout_;
  std::mutex serial_;
  std::atomic<std::uint64_t> evaluations_{0};
  std::atomic<std::uint64_t> backend_calls_{0};
  std::atomic<std::uint64_t> refute_calls_{0};
  std::atomic<std::uint64_t> restarts_{0};
};

// Runs `call` against `v`. A crashed session is restarted and reported as a
// failed check with the crash message at `line`.
template <class F>
CheckResult restart_on_crash(Verifier& v, std::size_t line, F&& call) {
  try {
    return call();
  } catch (const BackendDown& e) {
    CheckResult r;
    r.errors.push_back({line, e.what()});
    v.restart();
    return r;
  }
}

}  // namespace proofbeam

#endif  // PROOFBEAM_VERIFIER_H_
