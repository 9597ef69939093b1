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

#include "proofbeam/premises.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "proofbeam/error.h"
#include "proofbeam/rng.h"
#include "proofbeam/text.h"
#include "proofbeam/verifier.h"

namespace proofbeam {

using nlohmann::json;

namespace {

std::vector<std::string> token_set(std::string_view text) {
  auto toks = text::tokenize(text);
  std::sort(toks.begin(), toks.end());
  toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
  return toks;
}

void normalize(SparseVector& v) {
  double norm = 0.0;
  for (const auto& [_, w] : v) norm += w * w;
  norm = std::sqrt(norm);
  if (norm == 0.0) return;
  for (auto& [_, w] : v) w /= norm;
}

bool by_score_then_id(const ScoredPremise& a, const ScoredPremise& b) {
  if (a.select_score != b.select_score) return a.select_score > b.select_score;
  return a.id < b.id;
}

}  // namespace

std::vector<std::string> RetrievalResult::ids() const {
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.id);
  return out;
}

double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      s += a[i++].second * b[j++].second;
    } else if (a[i].first < b[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::vector<std::string> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  const std::size_t uni = a.size() + b.size() - inter.size();
  return static_cast<double>(inter.size()) / static_cast<double>(uni);
}

void PremiseIndex::add(PremiseEntry entry) {
  if (by_id_.count(entry.id)) throw DuplicatePremise("duplicate premise id: " + entry.id);
  by_id_.emplace(entry.id, entries_.size());
  entries_.push_back(std::move(entry));
  finalized_ = false;
}

void PremiseIndex::finalize() {
  if (entries_.empty()) throw EmptyIndex("cannot finalize an empty premise index");
  vocab_.clear();
  token_sets_.clear();
  std::vector<std::size_t> df;
  std::vector<std::vector<std::string>> docs;
  docs.reserve(entries_.size());
  for (const auto& e : entries_) {
    docs.push_back(text::tokenize(e.text));
    token_sets_.push_back(token_set(e.text));
    for (const auto& t : token_sets_.back()) {
      auto [it, fresh] = vocab_.emplace(t, vocab_.size());
      if (fresh) df.push_back(0);
      ++df[it->second];
    }
  }
  const double n = static_cast<double>(entries_.size());
  idf_.assign(df.size(), 0.0);
  for (std::size_t t = 0; t < df.size(); ++t) {
    idf_[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
  }
  finalized_ = true;
  vectors_.clear();
  for (const auto& e : entries_) vectors_.push_back(vectorize(e.text));
}

const PremiseEntry* PremiseIndex::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

void PremiseIndex::require_finalized() const {
  if (!finalized_) throw StaleIndex("premise index is not finalized");
}

double PremiseIndex::idf(std::string_view token) const {
  require_finalized();
  auto it = vocab_.find(std::string(token));
  if (it == vocab_.end()) return 0.0;
  return idf_[it->second];
}

SparseVector PremiseIndex::vectorize(std::string_view text) const {
  require_finalized();
  std::map<std::size_t, double> tf;
  for (const auto& t : text::tokenize(text)) {
    auto it = vocab_.find(t);
    if (it != vocab_.end()) tf[it->second] += 1.0;
  }
  SparseVector v;
  v.reserve(tf.size());
  for (const auto& [term, count] : tf) v.emplace_back(term, count * idf_[term]);
  normalize(v);
  return v;
}

std::vector<ScoredPremise> PremiseIndex::select(std::string_view query, std::size_t k,
                                                RetrievalBackend backend) const {
  require_finalized();
  std::vector<ScoredPremise> all;
  all.reserve(entries_.size());
  if (backend == RetrievalBackend::kTfidf) {
    const SparseVector q = vectorize(query);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const double s = dot(q, vectors_[i]);
      all.push_back({entries_[i].id, s, s});
    }
  } else {
    const auto q = token_set(query);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const double s = jaccard(q, token_sets_[i]);
      all.push_back({entries_[i].id, s, s});
    }
  }
  const std::size_t n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    by_score_then_id);
  all.resize(n);
  return all;
}

PremiseIndex PremiseIndex::load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FixtureInvalid("cannot read premise corpus " + path);
  PremiseIndex index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j.contains("text") ||
        !j["id"].is_string() || !j["text"].is_string()) {
      throw FixtureInvalid(path + ":" + std::to_string(lineno) + ": expected {id, text}");
    }
    index.add({j["id"].get<std::string>(), j["text"].get<std::string>(),
               j.value("source", std::string()), j.value("context", std::string())});
  }
  index.finalize();
  return index;
}

RetrievalResult rerank(std::string_view goal, const std::vector<ScoredPremise>& pool,
                       std::size_t k_rerank, const PairScorer* scorer) {
  RetrievalResult out;
  out.ranked = pool;
  out.k_select = pool.size();
  out.k_rerank = std::min(k_rerank, pool.size());
  for (auto& p : out.ranked) p.rerank_score = p.select_score;
  if (scorer == nullptr || !*scorer || out.k_rerank == 0) return out;
  const auto head_end = out.ranked.begin() + static_cast<std::ptrdiff_t>(out.k_rerank);
  for (auto it = out.ranked.begin(); it != head_end; ++it) it->rerank_score = (*scorer)(goal, it->id);
  std::stable_sort(out.ranked.begin(), head_end, [](const ScoredPremise& a, const ScoredPremise& b) {
    return a.rerank_score > b.rerank_score;
  });
  return out;
}

std::string retrieval_query(std::string_view goal, std::string_view state_hint) {
  std::string q(goal);
  if (auto sub = first_subgoal(state_hint)) q += "\n" + *sub;
  return q;
}

PremiseStats premise_stats(const RetrievalResult& retrieved, std::string_view candidate) {
  PremiseStats s;
  if (retrieved.ranked.empty()) return s;
  const auto named = text::identifier_tokens(candidate);
  const std::set<std::string> names(named.begin(), named.end());
  double sum = 0.0;
  s.top = retrieved.ranked.front().select_score;
  for (const auto& r : retrieved.ranked) {
    s.top = std::max(s.top, r.select_score);
    sum += r.select_score;
    if (names.count(r.id)) s.overlap += 1.0;
  }
  s.count = static_cast<double>(retrieved.ranked.size());
  s.mean = sum / s.count;
  return s;
}

std::vector<TrainingPair> extract_training_pairs(const std::vector<AttemptRecord>& attempts,
                                                 std::uint64_t seed, int n_neg) {
  std::mt19937_64 rng(seed);
  std::vector<TrainingPair> out;
  for (const auto& a : attempts) {
    if (!a.success || a.pool.empty()) continue;
    const auto named = text::identifier_tokens(a.action);
    const std::set<std::string> names(named.begin(), named.end());
    std::vector<std::string> positives;
    std::vector<std::string> rest;
    for (const auto& id : a.pool) {
      if (names.count(id)) {
        if (std::find(positives.begin(), positives.end(), id) == positives.end()) {
          positives.push_back(id);
        }
      } else if (std::find(rest.begin(), rest.end(), id) == rest.end()) {
        rest.push_back(id);
      }
    }
    for (const auto& pos : positives) {
      std::vector<std::string> pool = rest;
      const std::size_t take = std::min<std::size_t>(pool.size(), std::max(0, n_neg));
      for (std::size_t i = 0; i < take; ++i) {
        std::swap(pool[i], pool[uniform_index(rng, i, pool.size() - 1)]);
      }
      pool.resize(take);
      out.push_back({a.goal, pos, std::move(pool)});
    }
  }
  return out;
}

json to_json(const TrainingPair& pair) {
  return json{{"goal", pair.goal}, {"pos", pair.positive}, {"negs", pair.negatives}};
}

}  // namespace proofbeam
