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

#ifndef PROOFBEAM_DATASETS_H_
#define PROOFBEAM_DATASETS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "proofbeam/datalog.h"
#include "proofbeam/premises.h"
#include "proofbeam/rerank.h"

namespace proofbeam {

// Groups attempts by run id (in order of first appearance) and orders each
// group by sequence number.
std::vector<std::vector<AttemptRecord>> episodes_by_run(const std::vector<AttemptRecord>& attempts);

enum class LabelMode { kBinary, kQ, kAwr };

// Throws std::invalid_argument for anything but binary, q, awr.
LabelMode parse_label_mode(const std::string& name);

struct RerankerDataset {
  LabelMode mode = LabelMode::kBinary;
  std::vector<Example> examples;         // binary and awr
  std::vector<Transition> transitions;   // q and awr; `next` indexes this list
  std::size_t skipped = 0;               // malformed lines
};

// binary: one example per step/finisher attempt carrying a feature vector.
// q and awr: per-run episodes through build_rewards; awr also fills
// examples weighted by exp(clamp(A / beta)).
RerankerDataset build_reranker_dataset(const std::vector<AttemptRecord>& attempts, LabelMode mode,
                                       double beta = 1.0);
RerankerDataset build_reranker_dataset(const std::string& attempts_path, LabelMode mode,
                                       double beta = 1.0);

struct Episode {
  std::string run_id;
  std::vector<Transition> transitions;  // accepted steps only, in order
};

std::vector<Episode> build_trajectories(const std::vector<AttemptRecord>& attempts);
std::vector<Episode> build_trajectories(const std::string& attempts_path,
                                        std::size_t* skipped = nullptr);

std::vector<TrainingPair> build_premise_dataset(const std::string& attempts_path,
                                                std::uint64_t seed,
                                                std::size_t* skipped = nullptr);

struct RepairRecord {
  std::string run_id;
  std::int64_t seq = 0;
  std::string hid;
  std::string block_kind;
  std::optional<int> stage;
  std::string effective_goal;
  std::vector<std::string> counterexamples;
  std::string candidate_fp;
  std::string verdict;
  int ban_size = 0;
  std::string tag;
};

std::vector<RepairRecord> build_repair_dataset(const std::vector<AttemptRecord>& attempts);
std::vector<RepairRecord> build_repair_dataset(const std::string& attempts_path,
                                               std::size_t* skipped = nullptr);

nlohmann::json to_json(const Example& e);
nlohmann::json to_json(const Transition& t);
nlohmann::json to_json(const RepairRecord& r);

// One JSON object per line, keys sorted, so equal inputs give equal bytes.
std::string to_jsonl(const std::vector<nlohmann::json>& rows);

}  // namespace proofbeam

#endif  // PROOFBEAM_DATASETS_H_
