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

#include "proofbeam/hints.h"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "proofbeam/error.h"
#include "proofbeam/text.h"

namespace proofbeam {

using nlohmann::json;

const std::set<std::string>& trivial_facts() {
  static const std::set<std::string> kStop = {"refl", "sym", "trans", "TrueI", "conjI"};
  return kStop;
}

std::string_view to_string(HintSource source) {
  return source == HintSource::kContext ? "ctx" : "lex";
}

std::vector<std::string> state_fact_names(std::string_view state) {
  std::vector<std::string> out;
  bool in = false;
  for (const auto& line : text::split_lines(state)) {
    const std::string_view t = text::trim(line);
    if (t == "this:" || t == "assms:" || t == "facts:") {
      in = true;
      continue;
    }
    if (!in) continue;
    if (t.empty() || text::indent_width(line) == 0) {
      in = false;
      continue;
    }
    std::string name(text::first_word(t));
    if (!name.empty() && name.back() == ':') name.pop_back();
    if (!name.empty()) out.push_back(std::move(name));
  }
  return out;
}

std::vector<std::string> normalize_facts(const std::vector<std::string>& names, int k) {
  std::vector<std::string> out;
  if (k <= 0) return out;
  std::unordered_set<std::string> seen;
  for (const auto& raw : names) {
    const auto dot = raw.rfind('.');
    std::string n = dot == std::string::npos ? raw : raw.substr(dot + 1);
    if (n.empty() || trivial_facts().count(n) || !seen.insert(n).second) continue;
    out.push_back(std::move(n));
    if (out.size() == static_cast<std::size_t>(k)) break;
  }
  return out;
}

std::vector<std::string> context_hints(Verifier& verifier, std::string_view goal, int k_ctx) {
  if (k_ctx <= 0) return {};
  try {
    const CheckResult r = verifier.probe({make_header(goal)});
    return normalize_facts(state_fact_names(r.state_hint), k_ctx);
  } catch (const std::exception&) {
    return {};
  }
}

json HintLexicon::to_json() const {
  json doc = json::object();
  for (const auto& [tok, list] : entries) {
    json arr = json::array();
    for (const auto& [lemma, w] : list) arr.push_back(json::array({lemma, w}));
    doc[tok] = std::move(arr);
  }
  return doc;
}

HintLexicon HintLexicon::from_json(const json& doc) {
  if (!doc.is_object()) throw LexiconInvalid("lexicon must be a JSON object");
  HintLexicon lex;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!it.value().is_array()) throw LexiconInvalid("lexicon entry is not a list: " + it.key());
    std::map<std::string, double> merged;
    std::vector<std::string> order;
    for (const auto& pair : it.value()) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_number()) {
        throw LexiconInvalid("lexicon pairs must be [lemma, weight] under " + it.key());
      }
      const double w = pair[1].get<double>();
      if (!(w >= 0)) throw LexiconInvalid("negative lexicon weight under " + it.key());
      const std::string lemma = pair[0].get<std::string>();
      if (!merged.count(lemma)) order.push_back(lemma);
      merged[lemma] += w;
    }
    auto& list = lex.entries[it.key()];
    for (const auto& lemma : order) list.emplace_back(lemma, merged[lemma]);
  }
  return lex;
}

HintLexicon HintLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LexiconInvalid("cannot read lexicon " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw LexiconInvalid("lexicon is not valid JSON: " + path);
  return from_json(doc);
}

void HintLexicon::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write lexicon " + path);
  out << to_json().dump(1) << '\n';
}

std::map<std::string, double> lexicon_scores(const HintLexicon& lexicon, std::string_view goal) {
  std::map<std::string, double> scores;
  for (const auto& tok : text::tokenize(goal)) {
    auto it = lexicon.entries.find(tok);
    if (it == lexicon.entries.end()) continue;
    for (const auto& [lemma, w] : it->second) scores[lemma] += w;
  }
  return scores;
}

std::vector<std::string> lexicon_hints(const HintLexicon& lexicon, std::string_view goal,
                                       int k_lex) {
  if (k_lex <= 0) return {};
  std::vector<std::pair<std::string, double>> ranked;
  for (const auto& [lemma, s] : lexicon_scores(lexicon, goal)) {
    if (s > 0) ranked.emplace_back(lemma, s);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (const auto& [lemma, _] : ranked) {
    if (out.size() == static_cast<std::size_t>(k_lex)) break;
    out.push_back(lemma);
  }
  return out;
}

HintSet combine_hints(const std::vector<std::string>& ctx, const std::vector<std::string>& lex,
                      int k_hint) {
  HintSet out;
  if (k_hint <= 0) return out;
  std::unordered_set<std::string> seen;
  auto add = [&](const std::string& id, HintSource src) {
    if (out.ids.size() == static_cast<std::size_t>(k_hint) || !seen.insert(id).second) return;
    out.ids.push_back(id);
    out.sources.push_back(src);
  };
  for (const auto& id : ctx) add(id, HintSource::kContext);
  for (const auto& id : lex) add(id, HintSource::kLexicon);
  return out;
}

int hint_bonus(std::string_view skeleton, const HintSet& hints, int k_hint) {
  const auto toks = text::identifier_tokens(skeleton);
  const std::unordered_set<std::string> present(toks.begin(), toks.end());
  std::unordered_set<std::string> used;
  for (const auto& id : hints.ids) {
    if (present.count(id)) used.insert(id);
  }
  return std::min(static_cast<int>(used.size()), std::max(0, k_hint));
}

int hint_bonus(const ProofScript& skeleton, const HintSet& hints, int k_hint) {
  return hint_bonus(skeleton.render(), hints, k_hint);
}

HintLexicon mine_lexicon(const std::vector<LexiconExample>& corpus) {
  std::map<std::string, std::map<std::string, double>> acc;
  for (const auto& ex : corpus) {
    auto toks = text::tokenize(ex.goal);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    std::set<std::string> lemmas(ex.lemmas.begin(), ex.lemmas.end());
    for (const auto& t : toks) {
      for (const auto& l : lemmas) acc[t][l] += 1.0;
    }
  }
  HintLexicon lex;
  for (auto& [tok, m] : acc) {
    auto& list = lex.entries[tok];
    for (auto& [lemma, w] : m) list.emplace_back(lemma, w);
  }
  return lex;
}

std::vector<LexiconExample> load_lexicon_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LexiconInvalid("cannot read corpus " + path);
  std::vector<LexiconExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("goal") || !j["goal"].is_string() ||
        !j.contains("lemmas") || !j["lemmas"].is_array()) {
      throw LexiconInvalid(path + ":" + std::to_string(lineno) + ": expected {goal, lemmas}");
    }
    LexiconExample ex{j["goal"].get<std::string>(), {}};
    for (const auto& l : j["lemmas"]) {
      if (!l.is_string()) throw LexiconInvalid(path + ":" + std::to_string(lineno) + ": bad lemma");
      ex.lemmas.push_back(l.get<std::string>());
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace proofbeam
