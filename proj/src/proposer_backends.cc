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

#include "proofbeam/proposer_backends.h"

#include <algorithm>
#include <fstream>
#include <random>
#include <regex>

#include "proofbeam/error.h"
#include "proofbeam/fingerprint.h"
#include "proofbeam/text.h"

namespace proofbeam {

using nlohmann::json;

std::vector<ProposerCall> RecordingProposer::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t RecordingProposer::call_count() const {
  std::lock_guard lock(mu_);
  return calls_.size();
}

void RecordingProposer::record(const std::string& system, const std::string& user, double t,
                               int n) {
  std::lock_guard lock(mu_);
  calls_.push_back({system, user, t, n});
}

// --- ScriptedProposer --------------------------------------------------------

std::string ScriptedProposer::key_for(std::string_view text) {
  return state_fingerprint(text).hex();
}

ScriptedProposer::ScriptedProposer(const json& fixture) {
  if (!fixture.is_object()) throw FixtureInvalid("scripted proposer fixture must be an object");
  for (auto it = fixture.begin(); it != fixture.end(); ++it) {
    const json& v = it.value();
    std::vector<std::string> responses;
    if (v.is_string()) {
      responses.push_back(v.get<std::string>());
    } else if (v.is_array()) {
      std::vector<std::string> lines;
      for (const auto& l : v) {
        if (!l.is_string()) throw FixtureInvalid("scripted lines must be strings");
        lines.push_back(l.get<std::string>());
      }
      responses.push_back(text::join_lines(lines));
    } else if (v.is_object() && v.contains("responses") && v["responses"].is_array()) {
      for (const auto& r : v["responses"]) {
        if (r.is_string()) {
          responses.push_back(r.get<std::string>());
        } else if (r.is_array()) {
          responses.push_back(text::join_lines(r.get<std::vector<std::string>>()));
        } else {
          throw FixtureInvalid("scripted response must be a string or list of lines");
        }
      }
    } else {
      throw FixtureInvalid("bad scripted proposer entry: " + it.key());
    }
    table_[it.key()] = Entry{std::move(responses), 0};
  }
}

ScriptedProposer ScriptedProposer::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FixtureInvalid("cannot read proposer fixture " + path);
  try {
    return ScriptedProposer(json::parse(in));
  } catch (const json::exception& e) {
    throw FixtureInvalid(std::string("proposer fixture is not JSON: ") + e.what());
  }
}

void ScriptedProposer::set(const std::string& key, std::vector<std::string> responses) {
  std::lock_guard lock(mu_);
  table_[key] = Entry{std::move(responses), 0};
}

std::string ScriptedProposer::complete(const std::string& system, const std::string& user,
                                       double temperature, int n) {
  record(system, user, temperature, n);
  std::vector<std::string> keys;
  const std::string state = prompt_section(user, "STATE");
  const std::string goal = prompt_section(user, "GOAL");
  if (!state.empty()) keys.push_back(key_for(state));
  if (!goal.empty()) {
    keys.push_back(key_for(goal));
    keys.push_back(goal);
  }
  keys.emplace_back("*");
  std::lock_guard lock(mu_);
  for (const auto& k : keys) {
    auto it = table_.find(k);
    if (it == table_.end() || it->second.responses.empty()) continue;
    Entry& e = it->second;
    const std::size_t i = std::min(e.next, e.responses.size() - 1);
    ++e.next;
    return e.responses[i];
  }
  return {};
}

// --- FunctionProposer --------------------------------------------------------

std::string FunctionProposer::complete(const std::string& system, const std::string& user,
                                       double temperature, int n) {
  record(system, user, temperature, n);
  return fn_(ProposerCall{system, user, temperature, n}, index_++);
}

// --- OracleProposer ----------------------------------------------------------

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string OracleProposer::complete(const std::string& system, const std::string& user,
                                     double temperature, int n) {
  record(system, user, temperature, n);
  const bool step = system.find("apply <method>") != std::string::npos;
  std::string node;
  static const std::regex kState(R"(STATE (\S+))");
  const std::string state = prompt_section(user, "STATE");
  std::smatch m;
  if (std::regex_search(state, m, kState) && space_.nodes.count(m[1].str())) {
    node = m[1].str();
  } else {
    node = space_.start_node(prompt_section(user, "GOAL"));
  }
  std::vector<std::string> out;
  for (const SpaceEdge* e : space_.out_edges(node)) {
    if (step ? e->cmd.starts_with("apply ") : e->cmd.starts_with("by ")) out.push_back(e->cmd);
  }
  if (!step && space_.nodes.at(node).subgoals == 0) out.emplace_back("done");
  if (noise_ > 0) {
    std::mt19937_64 rng(seed_ ^ fnv1a(user) ^ (step ? 0x5bd1e995ULL : 0));
    for (int i = 0; i < noise_; ++i) {
      const std::string fake = std::string(step ? "apply" : "by") + " (noise_" +
                               std::to_string(uniform_index(rng, 0, 999)) + ")";
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, 0, out.size())),
                 fake);
    }
  }
  return text::join_lines(out);
}

}  // namespace proofbeam
