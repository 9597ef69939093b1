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

#include "proofbeam/mock_backend.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <thread>

#include "proofbeam/error.h"
#include "proofbeam/text.h"

namespace proofbeam {

using nlohmann::json;

// --- SyntheticSpace --------------------------------------------------------

void SyntheticSpace::reindex() {
  index_.clear();
  by_cmd_.clear();
  out_.clear();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    index_.emplace(std::make_pair(edges[i].from, edges[i].cmd), i);
    by_cmd_.emplace(edges[i].cmd, i);
    out_[edges[i].from].push_back(i);
  }
}

void SyntheticSpace::validate() const {
  if (root.empty() || !nodes.count(root)) throw FixtureInvalid("root node missing");
  for (const auto& [id, node] : nodes) {
    if (node.subgoals < 0) throw FixtureInvalid("negative subgoal count at " + id);
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const SpaceEdge& e : edges) {
    if (!nodes.count(e.from) || !nodes.count(e.to) || (e.after && !nodes.count(*e.after))) {
      throw FixtureInvalid("edge references unknown node: " + e.from + " -> " + e.to);
    }
    if (text::collapse_whitespace(e.cmd) != e.cmd || e.cmd.empty()) {
      throw FixtureInvalid("edge command must be non-empty and whitespace-normalized: " + e.cmd);
    }
    if (!seen.emplace(e.from, e.cmd).second) {
      throw FixtureInvalid("duplicate edge " + e.from + " / " + e.cmd);
    }
  }
  for (const auto& [goal, id] : lemmas) {
    if (!nodes.count(id)) throw FixtureInvalid("lemma start node unknown: " + id);
  }
  for (const auto& [goal, bindings] : refutable) {
    if (bindings.empty()) throw FixtureInvalid("refutable entry without bindings: " + goal);
  }
}

const SpaceEdge* SyntheticSpace::edge(const std::string& from, const std::string& cmd) const {
  auto it = index_.find({from, cmd});
  return it == index_.end() ? nullptr : &edges[it->second];
}

const SpaceEdge* SyntheticSpace::any_edge(const std::string& cmd) const {
  auto it = by_cmd_.find(cmd);
  return it == by_cmd_.end() ? nullptr : &edges[it->second];
}

std::vector<const SpaceEdge*> SyntheticSpace::out_edges(const std::string& from) const {
  std::vector<const SpaceEdge*> out;
  if (auto it = out_.find(from); it != out_.end()) {
    for (std::size_t i : it->second) out.push_back(&edges[i]);
  }
  return out;
}

std::string SyntheticSpace::start_node(const std::string& goal) const {
  const std::string g = text::collapse_whitespace(goal);
  if (auto it = lemmas.find(g); it != lemmas.end()) return it->second;
  if (auto it = nodes.find(root); it != nodes.end() && it->second.goal == g) return root;
  for (const auto& [id, node] : nodes) {
    if (!node.goal.empty() && node.goal == g) return id;
  }
  return root;
}

std::vector<std::string> SyntheticSpace::terminals() const {
  std::vector<std::string> out;
  for (const auto& [id, node] : nodes) {
    if (node.subgoals == 0) out.push_back(id);
  }
  return out;
}

const std::string& SyntheticSpace::root_goal() const { return nodes.at(root).goal; }

json SyntheticSpace::to_json() const {
  json doc;
  doc["root"] = root;
  json jn = json::object();
  for (const auto& [id, node] : nodes) {
    json n{{"subgoals", node.subgoals}};
    if (!node.goal.empty()) n["goal"] = node.goal;
    if (!node.facts.empty()) n["facts"] = node.facts;
    jn[id] = std::move(n);
  }
  doc["nodes"] = std::move(jn);
  json je = json::array();
  for (const SpaceEdge& e : edges) {
    json j{{"from", e.from}, {"cmd", e.cmd}, {"to", e.to}};
    if (e.after) j["after"] = *e.after;
    je.push_back(std::move(j));
  }
  doc["edges"] = std::move(je);
  json jr = json::object();
  for (const auto& [goal, bindings] : refutable) {
    json b = json::array();
    for (const auto& [var, val] : bindings) b.push_back({var, val});
    jr[goal] = std::move(b);
  }
  doc["refutable"] = std::move(jr);
  if (!lemmas.empty()) doc["lemmas"] = lemmas;
  if (!slow.empty()) doc["slow"] = slow;
  if (latency_ms > 0) doc["latency_ms"] = latency_ms;
  return doc;
}

SyntheticSpace SyntheticSpace::from_json(const json& doc) {
  SyntheticSpace s;
  try {
    if (!doc.is_object()) throw FixtureInvalid("fixture must be a JSON object");
    s.root = doc.at("root").get<std::string>();
    for (const auto& item : doc.at("nodes").items()) {
      const std::string& id = item.key();
      const json& n = item.value();
      SpaceNode node;
      node.subgoals = n.at("subgoals").get<int>();
      if (n.contains("goal")) node.goal = text::collapse_whitespace(n["goal"].get<std::string>());
      if (n.contains("facts")) node.facts = n["facts"].get<std::vector<std::string>>();
      s.nodes.emplace(id, std::move(node));
    }
    for (const auto& e : doc.value("edges", json::array())) {
      SpaceEdge edge{e.at("from").get<std::string>(),
                     text::collapse_whitespace(e.at("cmd").get<std::string>()),
                     e.at("to").get<std::string>(), std::nullopt};
      if (e.contains("after")) edge.after = e["after"].get<std::string>();
      s.edges.push_back(std::move(edge));
    }
    const json refutable = doc.value("refutable", json::object());
    for (const auto& item : refutable.items()) {
      auto& out = s.refutable[text::collapse_whitespace(item.key())];
      for (const auto& b : item.value()) {
        out.emplace_back(b.at(0).get<std::string>(), b.at(1).get<std::string>());
      }
    }
    const json lemmas = doc.value("lemmas", json::object());
    for (const auto& item : lemmas.items()) {
      s.lemmas[text::collapse_whitespace(item.key())] = item.value().get<std::string>();
    }
    for (const auto& c : doc.value("slow", json::array())) {
      s.slow.insert(text::collapse_whitespace(c.get<std::string>()));
    }
    s.latency_ms = doc.value("latency_ms", 0);
  } catch (const json::exception& e) {
    throw FixtureInvalid(std::string("malformed fixture: ") + e.what());
  }
  s.validate();
  s.reindex();
  return s;
}

SyntheticSpace SyntheticSpace::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FixtureInvalid("cannot read fixture " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw FixtureInvalid(std::string("fixture is not JSON: ") + e.what());
  }
  return from_json(doc);
}

void SyntheticSpace::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FixtureInvalid("cannot write fixture " + path);
  out << to_json().dump(2) << '\n';
}

std::string render_node(const SyntheticSpace& space, const std::string& id) {
  const SpaceNode& node = space.nodes.at(id);
  std::ostringstream os;
  os << "STATE " << id << '\n';
  if (!node.facts.empty()) {
    os << "facts:\n";
    for (const auto& f : node.facts) os << "  " << f << '\n';
  }
  if (node.subgoals == 0) {
    os << "No subgoals!";
  } else {
    os << "goal (" << node.subgoals << (node.subgoals == 1 ? " subgoal" : " subgoals") << "):\n";
    os << " 1. " << (node.goal.empty() ? id : node.goal);
  }
  return os.str();
}

// --- interpreter -----------------------------------------------------------

namespace {

struct Word {
  std::string text;
  std::size_t pos;
};

// Keyword-ish words outside string literals and cartouches.
std::vector<Word> code_words(std::string_view s) {
  std::vector<Word> out;
  bool quoted = false;
  int cartouche = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.compare(i, 3, "\xE2\x80\xB9") == 0) {
      ++cartouche;
      i += 3;
      continue;
    }
    if (s.compare(i, 3, "\xE2\x80\xBA") == 0) {
      if (cartouche > 0) --cartouche;
      i += 3;
      continue;
    }
    if (s[i] == '"') {
      quoted = !quoted;
      ++i;
      continue;
    }
    if (quoted || cartouche > 0 || !text::is_word_char(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && text::is_word_char(s[j])) ++j;
    if (i == 0 || s[i - 1] != '?') out.push_back({std::string(s.substr(i, j - i)), i});
    i = j;
  }
  return out;
}

bool one_of(std::string_view w, std::initializer_list<std::string_view> set) {
  return std::find(set.begin(), set.end(), w) != set.end();
}

bool is_head_word(std::string_view w) {
  return one_of(w, {"have", "show", "obtain", "hence", "thus"});
}

bool is_show_word(std::string_view w) { return one_of(w, {"show", "thus"}); }

// Index into `ws` of the head keyword, when the command is a have/show head.
std::optional<std::size_t> head_index(const std::vector<Word>& ws) {
  if (ws.empty()) return std::nullopt;
  if (is_head_word(ws[0].text)) return 0;
  if (!one_of(ws[0].text, {"then", "from", "with", "moreover", "ultimately", "finally", "also"})) {
    return std::nullopt;
  }
  for (std::size_t k = 1; k < ws.size(); ++k) {
    if (is_head_word(ws[k].text)) return k;
    if (one_of(ws[k].text, {"by", "apply", "proof", "sorry", "qed", "done"})) break;
  }
  return std::nullopt;
}

// Splits `have "A" by simp` into the head and its justification.
std::vector<std::string> split_command(const std::string& line) {
  auto ws = code_words(line);
  auto h = head_index(ws);
  if (!h) {
    // An inline trailing sorry after an apply-style command.
    if (ws.size() > 1 && ws.back().text == "sorry" && ws.front().text != "sorry" &&
        text::trim(std::string_view(line).substr(ws.back().pos)) == "sorry") {
      return {std::string(text::trim(std::string_view(line).substr(0, ws.back().pos))), "sorry"};
    }
    return {line};
  }
  for (std::size_t k = *h + 1; k < ws.size(); ++k) {
    if (one_of(ws[k].text, {"by", "sorry", "proof", "done"})) {
      std::string head(text::trim(std::string_view(line).substr(0, ws[k].pos)));
      std::string rest(text::trim(std::string_view(line).substr(ws[k].pos)));
      std::vector<std::string> out{head};
      for (auto& r : split_command(rest)) out.push_back(std::move(r));
      return out;
    }
  }
  return {line};
}

struct State {
  enum Kind { kNode, kWild, kClosed } kind = kNode;
  std::string id;
};

struct Frame {
  State resume;
  bool is_head = false;
  bool proof_open = false;
  State proof_state;
};

class Walk {
 public:
  explicit Walk(const SyntheticSpace& s) : space_(s) {}

  std::optional<int> subgoals(const State& st) const {
    switch (st.kind) {
      case State::kNode: return space_.nodes.at(st.id).subgoals;
      case State::kClosed: return 0;
      case State::kWild: return std::nullopt;
    }
    return std::nullopt;
  }

  std::string render(const State& st) const {
    switch (st.kind) {
      case State::kNode: return render_node(space_, st.id);
      case State::kClosed: return "No subgoals!";
      case State::kWild: return "STATE ?";
    }
    return {};
  }

  const SpaceEdge* lookup(const State& st, const std::string& cmd) const {
    if (st.kind == State::kNode) return space_.edge(st.id, cmd);
    if (st.kind == State::kWild) return space_.any_edge(cmd);
    return nullptr;
  }

  static State node(const std::string& id) { return {State::kNode, id}; }

  RawOutcome run(std::string_view theory) {
    RawOutcome out;
    const auto lines = text::split_lines(theory);
    auto fail = [&](std::size_t line, std::string msg) {
      out.ok = false;
      out.errors.push_back({line, std::move(msg)});
    };
    if (lines.empty() || text::collapse_whitespace(lines[0]) != kTheoryHeader) {
      fail(0, "bad theory header");
      return out;
    }
    std::size_t end_line = lines.size();
    for (std::size_t i = lines.size(); i-- > 1;) {
      if (text::trim(lines[i]).empty()) continue;
      if (text::trim(lines[i]) == "end") end_line = i;
      break;
    }
    if (end_line == lines.size()) {
      fail(lines.size() - 1, "missing end");
      return out;
    }
    std::size_t i = 1;
    while (i < end_line && text::trim(lines[i]).empty()) ++i;
    if (i == end_line) {
      fail(end_line, "no lemma");
      return out;
    }
    auto goal = declaration_goal(text::trim(lines[i]));
    if (!goal) {
      fail(i, "expected a lemma declaration");
      return out;
    }
    state_ = node(space_.start_node(*goal));
    stack_.assign(1, Frame{});
    std::string_view decl = text::trim(lines[i]);
    const std::size_t close = decl.find('"', decl.find('"') + 1);
    std::string rest = text::collapse_whitespace(decl.substr(close + 1));
    std::string last_cmd;
    auto exec_line = [&](std::size_t ln, const std::string& line) -> bool {
      // A whole-line edge wins over splitting a justified head.
      std::vector<std::string> cmds =
          lookup(state_, line) ? std::vector<std::string>{line} : split_command(line);
      for (const auto& c : cmds) {
        if (space_.slow.count(c)) {
          out.timed_out = true;
          return false;
        }
        if (auto err = exec(c, cmds.size() == 1)) {
          fail(ln, *err);
          return false;
        }
        last_cmd = c;
      }
      return true;
    };
    if (!rest.empty() && !exec_line(i, rest)) return finish(out);
    for (++i; i < end_line; ++i) {
      std::string line = text::collapse_whitespace(lines[i]);
      if (line.empty()) continue;
      if (!exec_line(i, line)) return finish(out);
    }
    if (stack_.size() > 1 || stack_.back().proof_open) {
      fail(end_line, "unfinished proof");
    } else if (!finished_ && last_cmd != "sorry") {
      auto n = subgoals(state_);
      if (n && *n > 0) fail(end_line, "unfinished proof");
    }
    out.ok = out.errors.empty();
    return finish(out);
  }

 private:
  RawOutcome& finish(RawOutcome& out) {
    out.state_text = captured_ ? *captured_ : render(state_);
    if (out.timed_out) out.ok = false;
    return out;
  }

  // Leaves the current structural frame after its goal is discharged.
  void close_frame() {
    Frame& top = stack_.back();
    if (top.is_head) {
      state_ = top.resume;
      stack_.pop_back();
    } else {
      state_ = {State::kClosed, {}};
      finished_ = true;
    }
  }

  std::optional<std::string> exec(const std::string& cmd, bool whole_line) {
    if (finished_ && stack_.size() == 1) return "proof already finished";
    if (cmd == "print_state") {
      captured_ = render(state_);
      return std::nullopt;
    }
    const auto ws = code_words(cmd);
    const std::string first = ws.empty() ? std::string{} : ws.front().text;
    const SpaceEdge* e = lookup(state_, cmd);
    Frame& top = stack_.back();

    if (auto h = head_index(ws)) {
      if (e && whole_line && split_command(cmd).size() > 1) {
        state_ = node(e->to);
        return std::nullopt;
      }
      const bool show = is_show_word(ws[*h].text);
      const bool thesis = cmd.find("?thesis") != std::string::npos ||
                          cmd.find("?case") != std::string::npos;
      State to;
      State after = show ? State{State::kClosed, {}} : state_;
      if (e) {
        to = node(e->to);
        if (e->after) after = node(*e->after);
      } else if (show && thesis) {
        to = state_;
      } else {
        return "no such step";
      }
      stack_.push_back(Frame{after, true, false, {}});
      state_ = to;
      return std::nullopt;
    }
    if (first == "sorry") {
      if (top.is_head && !top.proof_open) {
        close_frame();
      } else {
        state_ = {State::kWild, {}};
      }
      return std::nullopt;
    }
    if (first == "proof") {
      if (top.proof_open) return "illegal proof command";
      if (e) {
        state_ = node(e->to);
      } else if (cmd != "proof -" && cmd != "proof") {
        return "no such step";
      }
      top.proof_open = true;
      top.proof_state = state_;
      return std::nullopt;
    }
    if (first == "qed") {
      if (!top.proof_open) return "unmatched qed";
      auto n = subgoals(state_);
      if (n && *n > 0) return "failed to finish proof";
      top.proof_open = false;
      close_frame();
      return std::nullopt;
    }
    if (first == "next") {
      if (!top.proof_open) return "illegal next";
      state_ = top.proof_state;
      return std::nullopt;
    }
    if (first == "case") {
      if (!top.proof_open) return "illegal case";
      if (e) state_ = node(e->to);
      return std::nullopt;
    }
    if (first == "by" || first == "done") {
      if (top.proof_open) return "illegal application of proof command in state mode";
      if (first == "by") {
        if (!e) return "no such step";
        state_ = node(e->to);
      }
      auto n = subgoals(state_);
      if (n && *n > 0) return "failed to finish proof";
      close_frame();
      return std::nullopt;
    }
    if (first == "apply") {
      if (top.proof_open) return "illegal application of proof command in state mode";
      if (!e) return "no such step";
      state_ = node(e->to);
      return std::nullopt;
    }
    if (e) {
      state_ = node(e->to);
      return std::nullopt;
    }
    if (one_of(first, {"using", "unfolding", "fix", "assume", "note", "let", "define",
                       "moreover", "ultimately", "also", "finally", "then", "from", "with",
                       "including", "supply", "text", "txt"})) {
      return std::nullopt;
    }
    return "no such step";
  }

  const SyntheticSpace& space_;
  State state_;
  std::vector<Frame> stack_;
  std::optional<std::string> captured_;
  bool finished_ = false;
};

}  // namespace

// --- MockBackend -----------------------------------------------------------

MockBackend::MockBackend(SyntheticSpace space) : space_(std::move(space)) {
  space_.validate();
  space_.reindex();
}

RawOutcome MockBackend::check_theory(std::string_view theory, Millis timeout) {
  ++calls_;
  if (space_.latency_ms > 0) {
    const Millis wait(std::min<std::int64_t>(space_.latency_ms, timeout.count()));
    std::this_thread::sleep_for(wait);
    if (space_.latency_ms > timeout.count()) {
      RawOutcome out;
      out.timed_out = true;
      return out;
    }
  }
  return Walk(space_).run(theory);
}

void MockBackend::restart() {
  ++restarts_;
  ++sessions_;
}

std::optional<CounterexampleReport> MockBackend::refute(std::string_view goal_or_state,
                                                        Millis /*timeout*/) {
  ++refutes_;
  std::string key = first_subgoal(goal_or_state).value_or(std::string(goal_or_state));
  key = text::collapse_whitespace(key);
  auto it = space_.refutable.find(key);
  if (it == space_.refutable.end()) return std::nullopt;
  return CounterexampleReport{it->second, "mock"};
}

MockBackend mock_from_fixture(const json& fixture) {
  return MockBackend(SyntheticSpace::from_json(fixture));
}

// --- FaultInjectingBackend ---------------------------------------------------

void FaultInjectingBackend::crash_after(int n) {
  std::lock_guard lock(mu_);
  countdown_ = n;
}

void FaultInjectingBackend::crash_randomly(double p, std::uint64_t seed) {
  std::lock_guard lock(mu_);
  p_ = p;
  rng_.seed(seed);
}

bool FaultInjectingBackend::down() const {
  std::lock_guard lock(mu_);
  return down_;
}

void FaultInjectingBackend::maybe_crash() {
  std::lock_guard lock(mu_);
  if (!down_) {
    if (countdown_ == 0) {
      down_ = true;
      countdown_ = -1;
    } else if (countdown_ > 0) {
      --countdown_;
    }
    if (!down_ && p_ > 0.0 && uniform_unit(rng_) < p_) down_ = true;
    if (down_) ++crashes_;
  }
  if (down_) throw BackendDown("backend session crashed");
}

RawOutcome FaultInjectingBackend::check_theory(std::string_view theory, Millis timeout) {
  maybe_crash();
  return inner_.check_theory(theory, timeout);
}

void FaultInjectingBackend::restart() {
  {
    std::lock_guard lock(mu_);
    down_ = false;
  }
  inner_.restart();
}

std::optional<CounterexampleReport> FaultInjectingBackend::refute(std::string_view goal_or_state,
                                                                  Millis timeout) {
  maybe_crash();
  return inner_.refute(goal_or_state, timeout);
}

// --- generation --------------------------------------------------------------

namespace {

const std::vector<std::string> kApplyVocab = {
    "apply simp",        "apply auto",          "apply blast",        "apply (induction xs)",
    "apply (cases xs)",  "apply clarsimp",      "apply (rule conjI)", "apply (intro allI)",
    "apply arith",       "apply (erule exE)",   "apply fastforce",    "apply (simp add: foo)",
};

const std::vector<std::string> kFinisherVocab = {
    "by simp", "by auto", "by blast", "by fastforce", "by (metis foo)", "by arith",
};

}  // namespace

SyntheticSpace generate_space(int depth, int branching, int num_solutions, std::uint64_t seed) {
  if (depth < 1 || branching < 1 || num_solutions < 0) {
    throw std::invalid_argument("generate_space needs depth >= 1, branching >= 1, m >= 0");
  }
  constexpr std::size_t kMaxNodes = 5000;
  std::mt19937_64 rng(seed);
  struct Gen {
    std::string id;
    int depth;
    int parent;
    std::vector<int> kids;
    std::vector<std::string> cmds;  // commands used on outgoing edges
  };
  std::vector<Gen> g{{"n0", 0, -1, {}, {}}};
  std::vector<std::array<int, 2>> tree_edges;
  for (std::size_t at = 0; at < g.size(); ++at) {
    if (g[at].depth >= depth - 1) continue;
    const int lo = at == 0 ? 1 : 0;
    const int kids = static_cast<int>(uniform_index(rng, lo, branching));
    for (int k = 0; k < kids && g.size() < kMaxNodes; ++k) {
      const int id = static_cast<int>(g.size());
      g.push_back({"n" + std::to_string(id), g[at].depth + 1, static_cast<int>(at), {}, {}});
      g[at].kids.push_back(id);
      tree_edges.push_back({static_cast<int>(at), id});
    }
  }

  // Finisher hosts: distinct nodes chosen uniformly.
  std::vector<int> order(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) order[i] = static_cast<int>(i);
  shuffle_in_place(order, rng);
  std::vector<int> hosts(order.begin(),
                         order.begin() + std::min<std::size_t>(order.size(), num_solutions));
  std::sort(hosts.begin(), hosts.end());

  // Remaining proof length via the nearest host below each node.
  constexpr int kInf = 1 << 29;
  std::vector<int> rd(g.size(), kInf);
  for (int h : hosts) rd[h] = 1;
  for (std::size_t i = g.size(); i-- > 0;) {
    for (int k : g[i].kids) rd[i] = std::min(rd[i], rd[k] == kInf ? kInf : rd[k] + 1);
  }
  std::vector<int> n(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (rd[i] == kInf) {
      n[i] = depth + 1 + g[i].depth;
    } else {
      n[i] = g[i].parent < 0 ? rd[i] : std::min(n[g[i].parent], rd[i]);
    }
  }

  SyntheticSpace s;
  s.root = "n0";
  for (std::size_t i = 0; i < g.size(); ++i) {
    s.nodes[g[i].id] = SpaceNode{n[i], "P" + std::to_string(i) + " xs", {}};
  }
  std::size_t overflow = 0;
  auto fresh_cmd = [&](Gen& from) {
    std::vector<std::string> pool;
    for (const auto& c : kApplyVocab) {
      if (std::find(from.cmds.begin(), from.cmds.end(), c) == from.cmds.end()) pool.push_back(c);
    }
    std::string c = pool.empty() ? "apply (rule lemma_" + std::to_string(overflow++) + ")"
                                 : pool[uniform_index(rng, 0, pool.size() - 1)];
    from.cmds.push_back(c);
    return c;
  };
  for (auto [from, to] : tree_edges) {
    s.edges.push_back({g[from].id, fresh_cmd(g[from]), g[to].id, std::nullopt});
  }
  // Extra edges into dead nodes one level down keep it a DAG without adding
  // solution paths.
  std::vector<std::vector<int>> dead_at(depth + 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (rd[i] == kInf) dead_at[g[i].depth].push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int d = g[i].depth + 1;
    if (d >= depth || dead_at[d].empty()) continue;
    if (static_cast<int>(g[i].kids.size()) >= branching) continue;
    if (uniform_unit(rng) >= 0.3) continue;
    const int target = dead_at[d][uniform_index(rng, 0, dead_at[d].size() - 1)];
    if (std::find(g[i].kids.begin(), g[i].kids.end(), target) != g[i].kids.end()) continue;
    g[i].kids.push_back(target);
    s.edges.push_back({g[i].id, fresh_cmd(g[i]), g[target].id, std::nullopt});
  }
  for (std::size_t k = 0; k < hosts.size(); ++k) {
    const std::string t = "t" + std::to_string(k);
    s.nodes[t] = SpaceNode{0, "", {}};
    const auto& fin = kFinisherVocab[uniform_index(rng, 0, kFinisherVocab.size() - 1)];
    s.edges.push_back({g[hosts[k]].id, fin, t, std::nullopt});
  }
  s.validate();
  s.reindex();
  return s;
}

}  // namespace proofbeam
