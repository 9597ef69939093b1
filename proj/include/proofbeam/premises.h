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

#ifndef PROOFBEAM_PREMISES_H_
#define PROOFBEAM_PREMISES_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "proofbeam/datalog.h"

namespace proofbeam {

struct PremiseEntry {
  std::string id;
  std::string text;
  std::string source;
  std::string context;
};

enum class RetrievalBackend { kTfidf, kOverlap };

struct ScoredPremise {
  std::string id;
  double select_score = 0.0;
  double rerank_score = 0.0;
};

struct RetrievalResult {
  std::vector<ScoredPremise> ranked;
  std::size_t k_select = 0;
  std::size_t k_rerank = 0;

  std::vector<std::string> ids() const;
};

// Sparse L2-normalized tf-idf vector keyed by term id, sorted by term id.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

double dot(const SparseVector& a, const SparseVector& b);

// Jaccard similarity; two empty sets count as equal (1).
double jaccard(const std::vector<std::string>& a_sorted, const std::vector<std::string>& b_sorted);

class PremiseIndex {
 public:
  // Throws DuplicatePremise. Leaves the index stale until finalize().
  void add(PremiseEntry entry);
  // Throws EmptyIndex.
  void finalize();

  bool finalized() const { return finalized_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<PremiseEntry>& entries() const { return entries_; }
  const PremiseEntry* find(std::string_view id) const;

  // Smooth idf: ln((1 + N) / (1 + df)) + 1. Throws StaleIndex.
  double idf(std::string_view token) const;
  // Terms missing from the vocabulary are dropped. Throws StaleIndex.
  SparseVector vectorize(std::string_view text) const;
  const SparseVector& vector_of(std::size_t i) const { return vectors_.at(i); }
  // Sorted, deduplicated tokens of entry i.
  const std::vector<std::string>& tokens_of(std::size_t i) const { return token_sets_.at(i); }

  // Top k by score, ties by id ascending. Throws StaleIndex.
  std::vector<ScoredPremise> select(std::string_view query, std::size_t k,
                                    RetrievalBackend backend = RetrievalBackend::kTfidf) const;

  // JSONL `{id, text, source?}` per line, finalized. Throws FixtureInvalid.
  static PremiseIndex load_jsonl(const std::string& path);

 private:
  void require_finalized() const;

  std::vector<PremiseEntry> entries_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<double> idf_;
  std::vector<SparseVector> vectors_;
  std::vector<std::vector<std::string>> token_sets_;
  bool finalized_ = false;
};

// Scores a (goal, premise id) pair; higher is better.
using PairScorer = std::function<double(std::string_view goal, const std::string& id)>;

// Rescoring of the top k_rerank by `scorer`, or the select score reused when
// there is none. The tail keeps select order.
RetrievalResult rerank(std::string_view goal, const std::vector<ScoredPremise>& pool,
                       std::size_t k_rerank, const PairScorer* scorer = nullptr);

// The query used during search: goal plus the first subgoal, when known.
std::string retrieval_query(std::string_view goal, std::string_view state_hint);

struct PremiseStats {
  double top = 0.0;
  double mean = 0.0;
  double overlap = 0.0;  // retrieved ids named in the candidate
  double count = 0.0;
};

PremiseStats premise_stats(const RetrievalResult& retrieved, std::string_view candidate);

inline constexpr int kDefaultNegatives = 4;

struct TrainingPair {
  std::string goal;
  std::string positive;
  std::vector<std::string> negatives;
};

// One pair per premise named by a successful attempt, with up to n_neg
// negatives drawn without replacement from the rest of its pool.
std::vector<TrainingPair> extract_training_pairs(const std::vector<AttemptRecord>& attempts,
                                                 std::uint64_t seed,
                                                 int n_neg = kDefaultNegatives);

nlohmann::json to_json(const TrainingPair& pair);

}  // namespace proofbeam

#endif  // PROOFBEAM_PREMISES_H_
