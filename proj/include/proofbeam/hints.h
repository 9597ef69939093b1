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

#ifndef PROOFBEAM_HINTS_H_
#define PROOFBEAM_HINTS_H_

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "proofbeam/script.h"
#include "proofbeam/verifier.h"

namespace proofbeam {

inline constexpr int kDefaultContextHints = 8;
inline constexpr int kDefaultLexiconHints = 8;
inline constexpr int kDefaultHintCap = 12;

// Facts too generic to be worth suggesting.
const std::set<std::string>& trivial_facts();

enum class HintSource { kContext, kLexicon };

std::string_view to_string(HintSource source);

struct HintSet {
  std::vector<std::string> ids;
  std::vector<HintSource> sources;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
};

// Fact names listed under `this:`, `assms:` or `facts:` headings of a state
// printout, in order, unnormalized.
std::vector<std::string> state_fact_names(std::string_view state);

// Strips qualifiers up to the last dot, drops stoplisted names and repeats,
// keeps the first `k`.
std::vector<std::string> normalize_facts(const std::vector<std::string>& names, int k);

// Probes the bare goal and reads the facts off the printed state. Verifier
// failures give an empty list.
std::vector<std::string> context_hints(Verifier& verifier, std::string_view goal, int k_ctx);

// token -> [(lemma, weight)], weights nonnegative, lemmas unique per token.
struct HintLexicon {
  std::map<std::string, std::vector<std::pair<std::string, double>>> entries;

  bool empty() const { return entries.empty(); }
  nlohmann::json to_json() const;
  // Throws LexiconInvalid.
  static HintLexicon from_json(const nlohmann::json& doc);
  static HintLexicon load(const std::string& path);
  void save(const std::string& path) const;
};

// score(h) = sum over goal tokens t (with multiplicity) of w(t, h); the top
// k_lex by score, ties by id ascending. Zero-score lemmas never appear.
std::vector<std::string> lexicon_hints(const HintLexicon& lexicon, std::string_view goal,
                                       int k_lex);

// Per-lemma scores behind lexicon_hints.
std::map<std::string, double> lexicon_scores(const HintLexicon& lexicon, std::string_view goal);

// Context hints first, then new lexicon hints, capped at k_hint.
HintSet combine_hints(const std::vector<std::string>& ctx, const std::vector<std::string>& lex,
                      int k_hint);

// min(number of distinct hint ids used as whole tokens, k_hint).
int hint_bonus(std::string_view skeleton, const HintSet& hints, int k_hint);
int hint_bonus(const ProofScript& skeleton, const HintSet& hints, int k_hint);

struct LexiconExample {
  std::string goal;
  std::vector<std::string> lemmas;
};

// Every distinct goal token adds 1 to every distinct lemma used with it.
HintLexicon mine_lexicon(const std::vector<LexiconExample>& corpus);

// JSONL `{goal, lemmas: [...]}`. Throws LexiconInvalid.
std::vector<LexiconExample> load_lexicon_corpus(const std::string& path);

}  // namespace proofbeam

#endif  // PROOFBEAM_HINTS_H_
