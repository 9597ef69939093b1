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

#include "proofbeam/datasets.h"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace proofbeam {

using nlohmann::json;

std::vector<std::vector<AttemptRecord>> episodes_by_run(const std::vector<AttemptRecord>& attempts) {
  std::vector<std::vector<AttemptRecord>> out;
  std::map<std::string, std::size_t> slot;
  for (const auto& a : attempts) {
    auto [it, fresh] = slot.emplace(a.run_id, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(a);
  }
  for (auto& ep : out) {
    std::stable_sort(ep.begin(), ep.end(),
                     [](const AttemptRecord& a, const AttemptRecord& b) { return a.seq < b.seq; });
  }
  return out;
}

LabelMode parse_label_mode(const std::string& name) {
  if (name == "binary") return LabelMode::kBinary;
  if (name == "q") return LabelMode::kQ;
  if (name == "awr") return LabelMode::kAwr;
  throw std::invalid_argument("unknown label mode " + name);
}

namespace {

bool is_search_attempt(const AttemptRecord& a) {
  return a.type == attempt_type::kStep || a.type == attempt_type::kFinisher;
}

}  // namespace

RerankerDataset build_reranker_dataset(const std::vector<AttemptRecord>& attempts, LabelMode mode,
                                       double beta) {
  RerankerDataset ds;
  ds.mode = mode;
  if (mode == LabelMode::kBinary) {
    for (const auto& a : attempts) {
      if (!is_search_attempt(a) || a.features.size() != kFeatureDim) continue;
      ds.examples.push_back({a.features, a.success ? 1 : 0, 1.0});
    }
    return ds;
  }
  for (const auto& ep : episodes_by_run(attempts)) {
    auto ts = build_rewards(ep);
    const std::size_t offset = ds.transitions.size();
    for (auto& t : ts) {
      for (auto& n : t.next) n += offset;
      ds.transitions.push_back(std::move(t));
    }
  }
  if (mode == LabelMode::kAwr && !ds.transitions.empty()) {
    const auto adv = advantages(ds.transitions);
    for (std::size_t i = 0; i < ds.transitions.size(); ++i) {
      ds.examples.push_back({ds.transitions[i].x, ds.transitions[i].accepted ? 1 : 0,
                             awr_weight(adv[i], beta)});
    }
  }
  return ds;
}

RerankerDataset build_reranker_dataset(const std::string& path, LabelMode mode, double beta) {
  const ReadResult read = read_attempts(path);
  RerankerDataset ds = build_reranker_dataset(read.attempts, mode, beta);
  ds.skipped = read.skipped;
  return ds;
}

std::vector<Episode> build_trajectories(const std::vector<AttemptRecord>& attempts) {
  std::vector<Episode> out;
  for (const auto& ep : episodes_by_run(attempts)) {
    Episode e;
    e.run_id = ep.front().run_id;
    for (auto& t : build_rewards(ep)) {
      if (!t.accepted) continue;
      t.next.clear();
      e.transitions.push_back(std::move(t));
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Episode> build_trajectories(const std::string& path, std::size_t* skipped) {
  const ReadResult read = read_attempts(path);
  if (skipped) *skipped = read.skipped;
  return build_trajectories(read.attempts);
}

std::vector<TrainingPair> build_premise_dataset(const std::string& path, std::uint64_t seed,
                                                std::size_t* skipped) {
  const ReadResult read = read_attempts(path);
  if (skipped) *skipped = read.skipped;
  return extract_training_pairs(read.attempts, seed);
}

std::vector<RepairRecord> build_repair_dataset(const std::vector<AttemptRecord>& attempts) {
  std::vector<RepairRecord> out;
  for (const auto& a : attempts) {
    if (a.type != attempt_type::kRepair) continue;
    RepairRecord r;
    r.run_id = a.run_id;
    r.seq = a.seq;
    r.hid = a.hid.value_or("");
    r.block_kind = a.block_kind.value_or("");
    r.stage = a.stage;
    r.effective_goal = a.effective_goal.value_or("");
    r.counterexamples = a.counterexamples;
    r.candidate_fp = a.candidate_fp.value_or("");
    r.verdict = a.verdict.value_or(a.success ? "verified" : "rejected");
    r.ban_size = a.ban_size.value_or(0);
    r.tag = a.tag.value_or("");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RepairRecord> build_repair_dataset(const std::string& path, std::size_t* skipped) {
  const ReadResult read = read_attempts(path);
  if (skipped) *skipped = read.skipped;
  return build_repair_dataset(read.attempts);
}

json to_json(const Example& e) { return json{{"x", e.x}, {"y", e.y}, {"w", e.weight}}; }

json to_json(const Transition& t) {
  json j{{"x", t.x},       {"r", t.reward},    {"accepted", t.accepted},
         {"terminal", t.terminal}, {"depth", t.depth}, {"next", t.next}};
  j["n_before"] = t.subgoals_before ? json(*t.subgoals_before) : json(nullptr);
  j["n_after"] = t.subgoals_after ? json(*t.subgoals_after) : json(nullptr);
  return j;
}

json to_json(const RepairRecord& r) {
  json j{{"run_id", r.run_id},
         {"seq", r.seq},
         {"hid", r.hid},
         {"block_kind", r.block_kind},
         {"effective_goal", r.effective_goal},
         {"counterexamples", r.counterexamples},
         {"candidate_fp", r.candidate_fp},
         {"verdict", r.verdict},
         {"ban_size", r.ban_size},
         {"tag", r.tag}};
  j["stage"] = r.stage ? json(*r.stage) : json(nullptr);
  return j;
}

std::string to_jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  return out;
}

}  // namespace proofbeam
