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

#include "proofbeam/verifier.h"

#include <limits>
#include <regex>
#include <stdexcept>

#include "proofbeam/text.h"

namespace proofbeam {

bool CheckResult::same_payload(const CheckResult& o) const {
  return success == o.success && subgoals == o.subgoals && state_hint == o.state_hint &&
         errors == o.errors && timed_out == o.timed_out;
}

namespace {

void require_lemma_prefix(const std::vector<std::string>& prefix) {
  if (prefix.empty() || !declaration_goal(prefix.front())) {
    throw std::invalid_argument("theory prefix must start with a lemma declaration");
  }
}

}  // namespace

std::string assemble_theory(const std::vector<std::string>& prefix, std::string_view candidate,
                            CheckMode mode) {
  require_lemma_prefix(prefix);
  std::vector<std::string> lines{std::string(kTheoryHeader)};
  lines.insert(lines.end(), prefix.begin(), prefix.end());
  lines.emplace_back(candidate);
  if (mode == CheckMode::kStep) {
    lines.emplace_back("print_state");
    lines.emplace_back("sorry");
  }
  lines.emplace_back("end");
  return text::join_lines(lines);
}

std::string assemble_probe(const std::vector<std::string>& prefix) {
  require_lemma_prefix(prefix);
  std::vector<std::string> lines{std::string(kTheoryHeader)};
  lines.insert(lines.end(), prefix.begin(), prefix.end());
  lines.emplace_back("print_state");
  lines.emplace_back("sorry");
  lines.emplace_back("end");
  return text::join_lines(lines);
}

std::string assemble_full(const ProofScript& script) {
  std::vector<std::string> lines{std::string(kTheoryHeader)};
  lines.insert(lines.end(), script.lines().begin(), script.lines().end());
  lines.emplace_back("end");
  return text::join_lines(lines);
}

std::optional<int> parse_subgoal_count(std::string_view state_hint) {
  static const std::regex kGoal(R"(goal \((\d+) subgoals?\):)");
  std::string s(state_hint);
  std::smatch m;
  if (std::regex_search(s, m, kGoal)) return std::stoi(m[1].str());
  if (s.find("No subgoals!") != std::string::npos) return 0;
  return std::nullopt;
}

std::optional<std::string> first_subgoal(std::string_view state_hint) {
  for (const std::string& line : text::split_lines(state_hint)) {
    std::string_view t = text::trim(line);
    if (t.starts_with("1.")) {
      std::string_view rest = text::trim(t.substr(2));
      if (!rest.empty()) return std::string(rest);
    }
  }
  return std::nullopt;
}

// --- GlobalCache -----------------------------------------------------------

std::optional<CheckResult> GlobalCache::get(const std::string& key) {
  std::lock_guard lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  order_.splice(order_.begin(), order_, it->second);
  return it->second->second;
}

void GlobalCache::put(const std::string& key, const CheckResult& value) {
  if (capacity_ == 0) return;
  std::lock_guard lock(mu_);
  if (auto it = index_.find(key); it != index_.end()) {
    it->second->second = value;
    order_.splice(order_.begin(), order_, it->second);
    return;
  }
  order_.emplace_front(key, value);
  index_[key] = order_.begin();
  while (order_.size() > capacity_) {
    index_.erase(order_.back().first);
    order_.pop_back();
  }
}

bool GlobalCache::contains(const std::string& key) const {
  std::lock_guard lock(mu_);
  return index_.count(key) > 0;
}

std::size_t GlobalCache::size() const {
  std::lock_guard lock(mu_);
  return order_.size();
}

void GlobalCache::clear() {
  std::lock_guard lock(mu_);
  order_.clear();
  index_.clear();
}

std::string step_cache_key(const std::vector<std::string>& prefix, std::string_view candidate,
                           CheckMode mode) {
  std::string key = sha1_hex(text::join_lines(prefix));
  key += mode == CheckMode::kStep ? "\x1fs\x1f" : "\x1f" "f\x1f";
  key += candidate;
  return key;
}

// --- Verifier --------------------------------------------------------------

Verifier::Verifier(VerifierBackend& backend, Millis default_timeout)
    : backend_(backend), default_timeout_(default_timeout) {}

CheckResult Verifier::run(std::string_view theory, std::size_t line_offset, std::size_t max_line,
                          Millis timeout) {
  ++backend_calls_;
  const auto start = std::chrono::steady_clock::now();
  RawOutcome raw;
  if (backend_.requires_serialization()) {
    std::lock_guard lock(serial_);
    raw = backend_.check_theory(theory, timeout);
  } else {
    raw = backend_.check_theory(theory, timeout);
  }
  CheckResult r;
  r.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  r.timed_out = raw.timed_out;
  r.state_hint = std::move(raw.state_text);
  for (LineError& e : raw.errors) {
    std::size_t line = e.line >= line_offset ? e.line - line_offset : 0;
    r.errors.push_back({std::min(line, max_line), std::move(e.message)});
  }
  if (r.timed_out && r.errors.empty()) r.errors.push_back({max_line, "timeout"});
  r.success = raw.ok && !raw.timed_out && r.errors.empty();
  r.subgoals = parse_subgoal_count(r.state_hint);
  return r;
}

CheckResult Verifier::check_step(StepCache& cache, const std::vector<std::string>& prefix,
                                 std::string_view candidate, CheckMode mode,
                                 std::optional<Millis> timeout) {
  ++evaluations_;
  const std::string key = step_cache_key(prefix, candidate, mode);
  if (auto it = cache.per_run.find(key); it != cache.per_run.end()) {
    CheckResult hit = it->second;
    hit.cache_hit = true;
    return hit;
  }
  if (cache.global) {
    if (auto hit = cache.global->get(key)) {
      cache.per_run.emplace(key, *hit);
      hit->cache_hit = true;
      return *hit;
    }
  }
  CheckResult r = run(assemble_theory(prefix, candidate, mode), 1, prefix.size(),
                      timeout.value_or(default_timeout_));
  if (!r.timed_out) {
    cache.per_run.emplace(key, r);
    if (cache.global) cache.global->put(key, r);
  }
  return r;
}

CheckResult Verifier::check_script(const ProofScript& script, std::optional<Millis> timeout) {
  ++evaluations_;
  return run(assemble_full(script), 1, script.size(), timeout.value_or(default_timeout_));
}

CheckResult Verifier::verify_full(const ProofScript& script, std::optional<Millis> timeout) {
  CheckResult r = check_script(script, timeout);
  if (!find_holes(script).empty()) r.success = false;
  return r;
}

CheckResult Verifier::probe(const std::vector<std::string>& prefix,
                            std::optional<Millis> timeout) {
  ++evaluations_;
  const std::size_t n = prefix.size();
  CheckResult r = run(assemble_probe(prefix), 1, std::numeric_limits<std::size_t>::max(),
                      timeout.value_or(default_timeout_));
  // Errors on the trailer lines (an open proof block at `end`) say nothing
  // about the prefix.
  std::erase_if(r.errors, [&](const LineError& e) { return e.line >= n && !r.timed_out; });
  for (LineError& e : r.errors) e.line = std::min(e.line, n);
  r.success = !r.timed_out && r.errors.empty();
  return r;
}

std::optional<CounterexampleReport> Verifier::refute(std::string_view goal_or_state,
                                                     std::optional<Millis> timeout) {
  ++refute_calls_;
  std::optional<CounterexampleReport> report;
  if (backend_.requires_serialization()) {
    std::lock_guard lock(serial_);
    report = backend_.refute(goal_or_state, timeout.value_or(default_timeout_));
  } else {
    report = backend_.refute(goal_or_state, timeout.value_or(default_timeout_));
  }
  if (report && report->bindings.empty()) return std::nullopt;
  return report;
}

void Verifier::restart() {
  ++restarts_;
  std::lock_guard lock(serial_);
  backend_.restart();
}

}  // namespace proofbeam
