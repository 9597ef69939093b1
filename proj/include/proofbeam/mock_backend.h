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

#ifndef PROOFBEAM_MOCK_BACKEND_H_
#define PROOFBEAM_MOCK_BACKEND_H_

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "proofbeam/rng.h"
#include "proofbeam/verifier.h"

namespace proofbeam {

struct SpaceNode {
  int subgoals = 0;
  std::string goal;                // first subgoal text; empty renders as the id
  std::vector<std::string> facts;  // rendered under a `facts:` heading
};

struct SpaceEdge {
  std::string from;
  std::string cmd;
  std::string to;
  // For have/show heads: the parent state once the head's block is closed.
  std::optional<std::string> after;
};

// A transition table standing in for a live prover.
class SyntheticSpace {
 public:
  std::string root;
  std::map<std::string, SpaceNode> nodes;
  std::vector<SpaceEdge> edges;
  std::map<std::string, std::string> lemmas;  // goal text -> start node
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> refutable;
  std::set<std::string> slow;  // commands that make the check time out
  int latency_ms = 0;

  // Throws FixtureInvalid.
  void validate() const;
  // Rebuilds the lookup tables; call after editing edges by hand.
  void reindex();

  const SpaceEdge* edge(const std::string& from, const std::string& cmd) const;
  // First edge labelled `cmd` anywhere, in table order.
  const SpaceEdge* any_edge(const std::string& cmd) const;
  std::vector<const SpaceEdge*> out_edges(const std::string& from) const;

  // Start node for a lemma goal: the lemmas table, then a node whose goal
  // matches, then the root.
  std::string start_node(const std::string& goal) const;
  std::vector<std::string> terminals() const;
  const std::string& root_goal() const;

  nlohmann::json to_json() const;
  // Throws FixtureInvalid.
  static SyntheticSpace from_json(const nlohmann::json& doc);
  static SyntheticSpace load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::map<std::pair<std::string, std::string>, std::size_t> index_;
  std::map<std::string, std::size_t> by_cmd_;
  std::map<std::string, std::vector<std::size_t>> out_;
};

// Renders a node the way the mock prints states.
std::string render_node(const SyntheticSpace& space, const std::string& id);

// Replays a SyntheticSpace. Immutable apart from its counters, so concurrent
// calls are fine.
class MockBackend : public VerifierBackend {
 public:
  explicit MockBackend(SyntheticSpace space);

  RawOutcome check_theory(std::string_view theory, Millis timeout) override;
  void restart() override;
  std::optional<CounterexampleReport> refute(std::string_view goal_or_state,
                                             Millis timeout) override;
  std::string name() const override { return "mock"; }

  const SyntheticSpace& space() const { return space_; }
  std::uint64_t calls() const { return calls_.load(); }
  std::uint64_t refutes() const { return refutes_.load(); }
  std::uint64_t restarts() const { return restarts_.load(); }
  std::uint64_t sessions() const { return sessions_.load(); }

 private:
  SyntheticSpace space_;
  std::atomic<std::uint64_t> calls_{0};
  std::atomic<std::uint64_t> refutes_{0};
  std::atomic<std::uint64_t> restarts_{0};
  std::atomic<std::uint64_t> sessions_{1};
};

MockBackend mock_from_fixture(const nlohmann::json& fixture);

// Wraps a backend and throws BackendDown on demand. Once crashed it stays
// down until restart().
class FaultInjectingBackend : public VerifierBackend {
 public:
  explicit FaultInjectingBackend(VerifierBackend& inner) : inner_(inner) {}

  // The call after the next `n` successful ones crashes.
  void crash_after(int n);
  // Each call crashes independently with probability p.
  void crash_randomly(double p, std::uint64_t seed);
  bool down() const;
  std::uint64_t crashes() const { return crashes_.load(); }

  RawOutcome check_theory(std::string_view theory, Millis timeout) override;
  void restart() override;
  std::optional<CounterexampleReport> refute(std::string_view goal_or_state,
                                             Millis timeout) override;
  std::string name() const override { return inner_.name(); }
  bool requires_serialization() const override { return inner_.requires_serialization(); }

 private:
  void maybe_crash();

  VerifierBackend& inner_;
  mutable std::mutex mu_;
  bool down_ = false;
  int countdown_ = -1;
  double p_ = 0.0;
  std::mt19937_64 rng_;
  std::atomic<std::uint64_t> crashes_{0};
};

// Pseudo-random space of apply steps with at most `num_solutions` finishers.
// Solution paths have length <= depth and non-increasing subgoal counts; every
// other node has more subgoals than any node on a solution path.
SyntheticSpace generate_space(int depth, int branching, int num_solutions, std::uint64_t seed);

}  // namespace proofbeam

#endif  // PROOFBEAM_MOCK_BACKEND_H_
