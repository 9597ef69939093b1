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

#include "proofbeam/script.h"

#include <algorithm>
#include <array>
#include <functional>
#include <set>
#include <unordered_set>

#include "proofbeam/error.h"
#include "proofbeam/text.h"

namespace proofbeam {
namespace {

constexpr std::string_view kCartoucheOpen = "\xE2\x80\xB9";
constexpr std::string_view kCartoucheClose = "\xE2\x80\xBA";

bool one_of(std::string_view w, std::initializer_list<std::string_view> set) {
  return std::find(set.begin(), set.end(), w) != set.end();
}

bool is_declaration_word(std::string_view w) {
  return one_of(w, {"lemma", "theorem", "corollary", "proposition", "schematic_goal"});
}

bool is_head_word(std::string_view w) {
  return one_of(w, {"have", "show", "obtain", "hence", "thus"});
}

bool is_isar_word(std::string_view w) {
  return one_of(w, {"lemma", "theorem", "corollary", "proposition", "proof", "qed", "have",
                    "show", "obtain", "hence", "thus", "then", "from", "with", "using",
                    "unfolding", "apply", "by", "done", "sorry", "oops", "case", "next", "fix",
                    "assume", "assumes", "shows", "fixes", "let", "note", "moreover",
                    "ultimately", "finally", "also", "consider", "define", "where", "and",
                    "subgoal", "defer", "prefer", "supply", "including", "presume"});
}

// Returns `text` with comments blanked and string/cartouche contents replaced
// by spaces. Byte length and newlines are preserved, so columns and line
// numbers carry over to the original.
std::string code_only(std::string_view text) {
  std::string out(text);
  enum class State { kCode, kString, kComment, kCartouche };
  State state = State::kCode;
  int depth = 0;
  auto blank = [&](std::size_t at, std::size_t n) {
    for (std::size_t k = at; k < at + n && k < out.size(); ++k) {
      if (out[k] != '\n') out[k] = ' ';
    }
  };
  std::size_t i = 0;
  while (i < text.size()) {
    std::string_view rest = text.substr(i);
    switch (state) {
      case State::kCode:
        if (rest.starts_with("(*")) {
          state = State::kComment;
          depth = 1;
          blank(i, 2);
          i += 2;
        } else if (rest.front() == '"') {
          state = State::kString;
          ++i;
        } else if (rest.starts_with(kCartoucheOpen)) {
          state = State::kCartouche;
          depth = 1;
          out[i] = '"';
          blank(i + 1, 2);
          i += 3;
        } else {
          ++i;
        }
        break;
      case State::kString:
        if (rest.front() == '\\' && rest.size() > 1) {
          blank(i, 2);
          i += 2;
        } else if (rest.front() == '"') {
          state = State::kCode;
          ++i;
        } else {
          blank(i, 1);
          ++i;
        }
        break;
      case State::kComment:
        if (rest.starts_with("(*")) {
          ++depth;
          blank(i, 2);
          i += 2;
        } else if (rest.starts_with("*)")) {
          blank(i, 2);
          i += 2;
          if (--depth == 0) state = State::kCode;
        } else {
          blank(i, 1);
          ++i;
        }
        break;
      case State::kCartouche:
        if (rest.starts_with(kCartoucheOpen)) {
          ++depth;
          blank(i, 3);
          i += 3;
        } else if (rest.starts_with(kCartoucheClose)) {
          if (--depth == 0) {
            state = State::kCode;
            out[i] = '"';
            blank(i + 1, 2);
          } else {
            blank(i, 3);
          }
          i += 3;
        } else {
          blank(i, 1);
          ++i;
        }
        break;
    }
  }
  return out;
}

struct Word {
  std::string_view text;
  std::size_t col;
};

std::vector<Word> words_of(std::string_view code) {
  std::vector<Word> out;
  std::size_t i = 0;
  while (i < code.size()) {
    if (!text::is_word_char(code[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < code.size() && text::is_word_char(code[j])) ++j;
    out.push_back({code.substr(i, j - i), i});
    i = j;
  }
  return out;
}

// Per-line structural facts for a script.
struct Analysis {
  std::vector<std::string> code;
  std::vector<std::size_t> depth;  // open `proof`s before the line
  std::vector<std::optional<std::size_t>> proof_match;  // line of matching qed
  std::vector<std::pair<std::size_t, std::size_t>> proof_pairs;
  std::vector<std::size_t> unmatched_qed;
  std::vector<std::size_t> unmatched_proof;

  std::size_t size() const { return code.size(); }

  std::string_view first(std::size_t i) const {
    auto ws = words_of(code[i]);
    return ws.empty() ? std::string_view{} : ws.front().text;
  }
  bool blank(std::size_t i) const { return text::trim(code[i]).empty(); }
};

Analysis analyze(const std::vector<std::string>& lines) {
  Analysis a;
  a.code = text::split_lines(code_only(text::join_lines(lines)));
  a.code.resize(lines.size());
  a.depth.assign(lines.size(), 0);
  a.proof_match.assign(lines.size(), std::nullopt);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    a.depth[i] = stack.size();
    for (const Word& w : words_of(a.code[i])) {
      if (w.text == "proof") {
        stack.push_back(i);
      } else if (w.text == "qed") {
        if (stack.empty()) {
          a.unmatched_qed.push_back(i);
          continue;
        }
        std::size_t open = stack.back();
        stack.pop_back();
        a.proof_pairs.emplace_back(open, i);
        if (!a.proof_match[open]) a.proof_match[open] = i;
      }
    }
  }
  a.unmatched_proof = stack;
  std::sort(a.proof_pairs.begin(), a.proof_pairs.end());
  return a;
}

bool is_terminal_dot(std::string_view code) {
  std::string_view t = text::trim(code);
  return t == "." || t == ".." || t.ends_with(" .") || t.ends_with(" ..");
}

// Index (into words) of the head keyword on a head line.
std::optional<std::size_t> head_keyword(const Analysis& a, std::size_t i) {
  auto ws = words_of(a.code[i]);
  if (ws.empty()) return std::nullopt;
  if (one_of(ws.front().text, {"apply", "by", "done", "proof", "qed", "case", "next", "sorry",
                                "lemma", "theorem", "corollary", "proposition"})) {
    return std::nullopt;
  }
  for (std::size_t k = 0; k < ws.size(); ++k) {
    if (is_head_word(ws[k].text)) return k;
  }
  return std::nullopt;
}

// Column of an inline justification keyword (`by`, `sorry`, `proof`) after
// the head keyword, if present.
std::optional<Word> inline_justification(const Analysis& a, std::size_t i) {
  auto hk = head_keyword(a, i);
  if (!hk) return std::nullopt;
  auto ws = words_of(a.code[i]);
  for (std::size_t k = *hk + 1; k < ws.size(); ++k) {
    if (one_of(ws[k].text, {"by", "sorry", "proof", "done"})) return ws[k];
  }
  return std::nullopt;
}

std::size_t head_block_end(const Analysis& a, const std::vector<std::string>& lines,
                           std::size_t h) {
  if (auto j = inline_justification(a, h)) {
    if (j->text == "proof" && a.proof_match[h]) return *a.proof_match[h] + 1;
    return h + 1;
  }
  if (is_terminal_dot(a.code[h])) return h + 1;
  const std::size_t ind = text::indent_width(lines[h]);
  std::size_t end = h + 1;
  for (std::size_t j = h + 1; j < a.size(); ++j) {
    if (a.blank(j)) continue;
    std::string_view fw = a.first(j);
    if (fw == "proof") return a.proof_match[j] ? *a.proof_match[j] + 1 : j + 1;
    if (one_of(fw, {"by", "sorry", "done"}) || is_terminal_dot(a.code[j])) return j + 1;
    if (one_of(fw, {"apply", "using", "unfolding", "supply", "including"}) ||
        text::indent_width(lines[j]) > ind) {
      end = j + 1;
      continue;
    }
    break;
  }
  return end;
}

std::size_t case_block_end(const Analysis& a, std::size_t c) {
  const std::size_t d = a.depth[c];
  std::size_t end = c + 1;
  for (std::size_t j = c + 1; j < a.size(); ++j) {
    if (a.depth[j] < d) break;
    std::string_view fw = a.first(j);
    if (a.depth[j] == d && one_of(fw, {"case", "next", "qed"})) break;
    if (!a.blank(j)) end = j + 1;
  }
  return end;
}

std::vector<BlockSpan> blocks_of(const Analysis& a, const std::vector<std::string>& lines,
                                 std::size_t header, BlockKind kind) {
  std::vector<BlockSpan> out;
  switch (kind) {
    case BlockKind::kHaveShow:
      for (std::size_t i = header + 1; i < a.size(); ++i) {
        if (head_keyword(a, i)) out.push_back({kind, i, head_block_end(a, lines, i)});
      }
      break;
    case BlockKind::kCaseBlock:
      for (std::size_t i = header + 1; i < a.size(); ++i) {
        if (a.first(i) == "case") out.push_back({kind, i, case_block_end(a, i)});
      }
      break;
    case BlockKind::kSubproof:
      for (auto [open, close] : a.proof_pairs) {
        if (open > header) out.push_back({kind, open, close + 1});
      }
      break;
    case BlockKind::kWhole:
      if (a.size() > header + 1) out.push_back({kind, header + 1, a.size()});
      break;
  }
  return out;
}

enum class LineClass { kApply, kBy, kDone, kProofMethod, kQed, kHeadInlineBy, kOther };

LineClass classify(const Analysis& a, std::size_t i) {
  std::string_view fw = a.first(i);
  if (fw == "apply") return LineClass::kApply;
  if (fw == "by") return LineClass::kBy;
  if (fw == "done") return LineClass::kDone;
  if (fw == "proof") return LineClass::kProofMethod;
  if (fw == "qed") return LineClass::kQed;
  if (auto j = inline_justification(a, i); j && j->text == "by") return LineClass::kHeadInlineBy;
  if (one_of(fw, {"using", "unfolding"})) {
    for (const Word& w : words_of(a.code[i])) {
      if (w.text == "by") return LineClass::kBy;
    }
  }
  if (is_terminal_dot(a.code[i]) && !head_keyword(a, i)) return LineClass::kBy;
  return LineClass::kOther;
}

std::string dedent_join(const std::vector<std::string>& lines, std::string_view indent) {
  std::size_t common = std::string::npos;
  for (const auto& l : lines) {
    if (text::trim(l).empty()) continue;
    common = std::min(common, text::indent_width(l));
  }
  if (common == std::string::npos) common = 0;
  std::vector<std::string> out;
  for (const auto& l : lines) {
    if (text::trim(l).empty()) {
      out.emplace_back();
    } else {
      out.push_back(std::string(indent) + std::string(text::trim_right(l.substr(common))));
    }
  }
  return text::join_lines(out);
}

bool is_fence(std::string_view line) { return text::trim(line).starts_with("```"); }

bool looks_like_code(std::string_view line) {
  std::string_view t = text::trim(line);
  if (t.empty()) return false;
  if (is_isar_word(text::first_word(t))) return true;
  return one_of(t.substr(0, 1), {"\"", "(", "{", "}", ".", "?"}) ||
         t.starts_with(kCartoucheOpen);
}

// Drops fences and leading/trailing prose or blank lines.
std::vector<std::string> strip_wrappers(std::string_view raw) {
  std::vector<std::string> lines;
  for (auto& l : text::split_lines(raw)) {
    if (!is_fence(l)) lines.push_back(std::move(l));
  }
  auto first = std::find_if(lines.begin(), lines.end(), looks_like_code);
  if (first == lines.end()) return {};
  auto last = std::find_if(lines.rbegin(), lines.rend(), looks_like_code).base();
  return {first, last};
}

// Text after the quoted goal on a declaration line.
std::string after_goal(std::string_view line) {
  auto open = line.find('"');
  if (open == std::string_view::npos) return {};
  auto close = line.find('"', open + 1);
  if (close == std::string_view::npos) return {};
  return std::string(text::trim(line.substr(close + 1)));
}

bool is_statement_continuation(std::string_view line) {
  return one_of(text::first_word(line), {"assumes", "shows", "fixes", "and", "obtains"});
}

std::vector<std::string> drop_header(const std::vector<std::string>& lines) {
  if (lines.empty() || !is_declaration_word(text::first_word(lines.front()))) return lines;
  std::vector<std::string> out;
  std::string rest = after_goal(lines.front());
  std::size_t i = 1;
  while (i < lines.size() && is_statement_continuation(lines[i])) ++i;
  if (!rest.empty()) out.push_back(rest);
  out.insert(out.end(), lines.begin() + static_cast<std::ptrdiff_t>(i), lines.end());
  return out;
}

}  // namespace

// --- ProofScript -----------------------------------------------------------

std::optional<std::string> declaration_goal(std::string_view line) {
  if (!is_declaration_word(text::first_word(line))) return std::nullopt;
  auto open = line.find('"');
  if (open == std::string_view::npos) return std::nullopt;
  auto close = line.find('"', open + 1);
  if (close == std::string_view::npos) return std::nullopt;
  return std::string(line.substr(open + 1, close - open - 1));
}

std::string make_header(std::string_view goal) { return "lemma \"" + std::string(goal) + "\""; }

ProofScript::ProofScript(std::vector<std::string> lines) : lines_(std::move(lines)) {
  auto it = std::find_if(lines_.begin(), lines_.end(),
                         [](const std::string& l) { return !text::trim(l).empty(); });
  if (it == lines_.end()) throw NoGoalHeader("script is empty");
  auto goal = declaration_goal(*it);
  if (!goal) throw NoGoalHeader("no quoted goal in declaration line: " + *it);
  goal_ = std::move(*goal);
  header_ = static_cast<std::size_t>(it - lines_.begin());
}

ProofScript ProofScript::parse(std::string_view text) {
  if (text::trim(text).empty()) throw NoGoalHeader("script is empty");
  if (text.ends_with('\n')) text.remove_suffix(1);
  return ProofScript(text::split_lines(text));
}

std::vector<std::string> ProofScript::body() const {
  return {lines_.begin() + static_cast<std::ptrdiff_t>(header_) + 1, lines_.end()};
}

std::string ProofScript::render() const { return text::join_lines(lines_); }

ProofScript parse_script(std::string_view text) { return ProofScript::parse(text); }

// --- holes -----------------------------------------------------------------

std::vector<Hole> find_holes(const ProofScript& script) {
  const std::string joined = script.render();
  const std::string code = code_only(joined);
  std::vector<Hole> holes;
  std::size_t line = 0;
  std::size_t cp = 0;
  constexpr std::string_view kSorry = "sorry";
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (code.compare(i, kSorry.size(), kSorry) == 0 &&
        (i == 0 || !text::is_word_char(code[i - 1])) &&
        (i + kSorry.size() >= code.size() || !text::is_word_char(code[i + kSorry.size()]))) {
      holes.push_back({line, line + 1, cp, cp + kSorry.size()});
    }
    if (code[i] == '\n') ++line;
    if ((static_cast<unsigned char>(joined[i]) & 0xC0) != 0x80) ++cp;
  }
  return holes;
}

Fingerprint hole_id(const ProofScript& script, const Hole& hole, std::size_t window) {
  const std::string joined = script.render();
  const std::size_t len = text::codepoint_count(joined);
  const std::size_t lo = hole.char_begin > window ? hole.char_begin - window : 0;
  const std::size_t hi = std::min(len, hole.char_end + window);
  const std::size_t b0 = text::byte_offset(joined, lo);
  const std::size_t b1 = text::byte_offset(joined, hi);
  return Fingerprint::of(std::string_view(joined).substr(b0, b1 - b0)).prefix16();
}

// --- editing ---------------------------------------------------------------

ProofScript replace_span(const ProofScript& script, LineRange span,
                         std::string_view replacement) {
  const auto& lines = script.lines();
  if (span.begin > span.end || span.end > lines.size()) {
    throw SpanOutOfRange("span out of range");
  }
  if (span.begin <= script.header_line()) {
    throw HeaderOverlap("replacement span overlaps the goal header");
  }
  std::string_view target;
  if (span.begin < lines.size()) {
    target = text::leading_indent(lines[span.begin]);
  } else if (!lines.empty()) {
    target = text::leading_indent(lines.back());
  }
  std::vector<std::string> repl;
  if (!replacement.empty()) {
    if (replacement.ends_with('\n')) replacement.remove_suffix(1);
    repl = text::split_lines(dedent_join(text::split_lines(replacement), target));
  }
  std::vector<std::string> out(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(span.begin));
  out.insert(out.end(), repl.begin(), repl.end());
  out.insert(out.end(), lines.begin() + static_cast<std::ptrdiff_t>(span.end), lines.end());
  return ProofScript(std::move(out));
}

ProofScript split_sorry_lines(const ProofScript& script) {
  std::vector<std::string> out;
  const Analysis a = analyze(script.lines());
  for (std::size_t i = 0; i < script.size(); ++i) {
    const std::string& line = script.line(i);
    if (i <= script.header_line()) {
      out.push_back(line);
      continue;
    }
    std::string rest_line = line;
    std::string rest_code = a.code[i];
    const std::string ind(text::leading_indent(line));
    bool first_piece = true;
    while (true) {
      std::optional<std::size_t> pos;
      for (const Word& w : words_of(rest_code)) {
        if (w.text == "sorry") {
          pos = w.col;
          break;
        }
      }
      if (!pos || text::trim(rest_code) == "sorry") {
        if (!text::trim(rest_line).empty() || first_piece) {
          out.push_back(first_piece ? rest_line : ind + std::string(text::trim(rest_line)));
        }
        break;
      }
      std::string before(text::trim_right(std::string_view(rest_line).substr(0, *pos)));
      const bool has_before = !text::trim(before).empty();
      if (has_before) {
        out.push_back(first_piece ? before : ind + std::string(text::trim(before)));
      }
      out.push_back(ind + (has_before ? "  sorry" : "sorry"));
      rest_line = rest_line.substr(*pos + 5);
      rest_code = rest_code.substr(*pos + 5);
      first_piece = false;
      if (text::trim(rest_code).empty()) break;
    }
  }
  return ProofScript(std::move(out));
}

// --- blocks ----------------------------------------------------------------

std::string_view block_kind_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::kHaveShow: return "have_show";
    case BlockKind::kCaseBlock: return "case_block";
    case BlockKind::kSubproof: return "subproof";
    case BlockKind::kWhole: return "whole";
  }
  return "whole";
}

std::optional<BlockKind> parse_block_kind(std::string_view name) {
  for (BlockKind k : {BlockKind::kHaveShow, BlockKind::kCaseBlock, BlockKind::kSubproof,
                      BlockKind::kWhole}) {
    if (block_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

std::vector<BlockSpan> all_blocks(const ProofScript& script, BlockKind kind) {
  return blocks_of(analyze(script.lines()), script.lines(), script.header_line(), kind);
}

std::optional<BlockSpan> enclosing_block(const ProofScript& script, std::size_t line,
                                         BlockKind kind) {
  std::optional<BlockSpan> best;
  for (const BlockSpan& b : all_blocks(script, kind)) {
    if (!b.lines().contains(line)) continue;
    if (!best || b.lines().size() < best->lines().size() ||
        (b.lines().size() == best->lines().size() && b.start_line > best->start_line)) {
      best = b;
    }
  }
  return best;
}

bool is_apply_legal(const ProofScript& script, const Hole& hole) {
  const Analysis a = analyze(script.lines());
  if (hole.start_line >= a.size() || a.depth[hole.start_line] != 0) return false;
  for (const BlockSpan& b : blocks_of(a, script.lines(), script.header_line(),
                                      BlockKind::kHaveShow)) {
    if (b.lines().contains(hole.start_line)) return false;
  }
  return true;
}

bool is_tactic_line(const ProofScript& script, std::size_t line) {
  if (line <= script.header_line() || line >= script.size()) return false;
  return classify(analyze(script.lines()), line) != LineClass::kOther;
}

OpenedScript open_minimal_sorries(const ProofScript& script,
                                  const std::vector<std::size_t>& failing_lines) {
  std::vector<std::string> lines = script.lines();
  const std::size_t header = script.header_line();
  std::vector<std::size_t> inserted;

  auto edit = [&](std::size_t a, std::size_t b, std::vector<std::string> repl,
                  std::vector<std::size_t> sorry_offsets) {
    const auto delta = static_cast<std::ptrdiff_t>(repl.size()) - static_cast<std::ptrdiff_t>(b - a);
    std::vector<std::size_t> next;
    for (std::size_t x : inserted) {
      if (x >= a && x < b) continue;
      next.push_back(x >= b ? static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + delta) : x);
    }
    for (std::size_t o : sorry_offsets) next.push_back(a + o);
    inserted = std::move(next);
    lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(a),
                lines.begin() + static_cast<std::ptrdiff_t>(b));
    lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(a), repl.begin(), repl.end());
  };

  std::set<std::size_t, std::greater<>> todo(failing_lines.begin(), failing_lines.end());
  for (std::size_t f : todo) {
    if (f <= header) continue;
    const Analysis an = analyze(lines);
    const std::size_t n = lines.size();
    if (f >= n) {
      std::size_t last = n;
      while (last > header + 1 && an.blank(last - 1)) --last;
      if (last <= header + 1 || an.first(last - 1) == "sorry") continue;
      edit(n, n, {std::string(text::leading_indent(lines[last - 1])) + "sorry"}, {0});
      continue;
    }
    const std::string ind(text::leading_indent(lines[f]));
    switch (classify(an, f)) {
      case LineClass::kQed:
        edit(f, f, {ind + "  sorry"}, {0});
        break;
      case LineClass::kProofMethod: {
        std::size_t end = an.proof_match[f] ? *an.proof_match[f] + 1 : f + 1;
        edit(f, end, {ind + "sorry"}, {0});
        break;
      }
      case LineClass::kHeadInlineBy: {
        auto j = inline_justification(an, f);
        std::string head(text::trim_right(std::string_view(lines[f]).substr(0, j->col)));
        edit(f, f + 1, {head, ind + "  sorry"}, {1});
        break;
      }
      case LineClass::kApply:
      case LineClass::kBy:
      case LineClass::kDone: {
        std::size_t seq_start = f;
        while (seq_start > header + 1 && classify(an, seq_start - 1) == LineClass::kApply) {
          --seq_start;
        }
        std::size_t seq_end = f + 1;
        if (classify(an, f) == LineClass::kApply) {
          while (seq_end < n && classify(an, seq_end) == LineClass::kApply) ++seq_end;
          if (seq_end < n && (classify(an, seq_end) == LineClass::kDone ||
                              classify(an, seq_end) == LineClass::kBy)) {
            ++seq_end;
          }
        }
        bool under_head = false;
        if (seq_start == f) {
          std::size_t p = f;
          while (p > header + 1 && an.blank(p - 1)) --p;
          if (p > header + 1) {
            const std::size_t h = p - 1;
            under_head = head_keyword(an, h).has_value() && !inline_justification(an, h) &&
                         !is_terminal_dot(an.code[h]) && head_block_end(an, lines, h) > f;
          }
        }
        if (under_head) {
          edit(f, seq_end, {ind + "proof -", ind + "  sorry", ind + "qed"}, {1});
        } else {
          edit(f, seq_end, {ind + "sorry"}, {0});
        }
        break;
      }
      case LineClass::kOther:
        break;
    }
  }

  ProofScript out(std::move(lines));
  std::unordered_set<std::size_t> marks(inserted.begin(), inserted.end());
  std::vector<Hole> opened;
  for (const Hole& h : find_holes(out)) {
    if (marks.count(h.start_line)) opened.push_back(h);
  }
  return {std::move(out), std::move(opened)};
}

// --- stripping and normalization -------------------------------------------

std::string strip_to_type(std::string_view block, BlockKind kind) {
  std::vector<std::string> lines = strip_wrappers(block);
  if (kind != BlockKind::kWhole) {
    lines = drop_header(lines);
    while (!lines.empty() && !looks_like_code(lines.front())) lines.erase(lines.begin());
  }
  while (!lines.empty() && text::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw EmptyAfterStrip("no proof text left after stripping");
  return dedent_join(lines, "");
}

namespace {

// One repair pass over structurally incomplete branches. Returns true when
// something changed.
bool close_open_branches(std::vector<std::string>& lines, std::size_t header) {
  const Analysis a = analyze(lines);
  if (!a.unmatched_qed.empty()) {
    lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(a.unmatched_qed.front()));
    return true;
  }
  for (std::size_t i = header + 1; i < a.size(); ++i) {
    if (!head_keyword(a, i) || inline_justification(a, i) || is_terminal_dot(a.code[i])) {
      continue;
    }
    const std::size_t end = head_block_end(a, lines, i);
    std::size_t last = end - 1;
    while (last > i && a.blank(last)) --last;
    std::string_view lf = a.first(last);
    const bool justified = last > i && (one_of(lf, {"by", "sorry", "done"}) ||
                                        is_terminal_dot(a.code[last]) ||
                                        (a.proof_pairs.end() !=
                                         std::find_if(a.proof_pairs.begin(), a.proof_pairs.end(),
                                                      [&](auto p) { return p.second == last; })));
    if (justified) continue;
    if (last > i && one_of(lf, {"apply", "using", "unfolding"}) == false) continue;
    std::string ind(text::leading_indent(lines[last]));
    if (last == i) ind += "  ";
    lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(last) + 1, ind + "sorry");
    return true;
  }
  for (std::size_t i = header + 1; i < a.size(); ++i) {
    if (a.first(i) != "apply") continue;
    std::size_t j = i + 1;
    while (j < a.size() && a.blank(j)) ++j;
    if (j < a.size() && one_of(a.first(j), {"apply", "done", "by", "sorry"})) continue;
    lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                 std::string(text::leading_indent(lines[i])) + "sorry");
    return true;
  }
  if (!a.unmatched_proof.empty()) {
    const std::size_t open = a.unmatched_proof.back();
    lines.push_back(std::string(text::leading_indent(lines[open])) + "qed");
    return true;
  }
  return false;
}

}  // namespace

ProofScript normalize_outline(std::string_view raw, std::string_view goal, bool enforce_holes) {
  std::vector<std::string> lines = strip_wrappers(raw);
  auto header = std::find_if(lines.begin(), lines.end(), [](const std::string& l) {
    return is_declaration_word(text::first_word(l));
  });
  std::vector<std::string> body =
      header == lines.end() ? lines
                            : drop_header({header, lines.end()});
  while (!body.empty() && text::trim(body.front()).empty()) body.erase(body.begin());
  while (!body.empty() && text::trim(body.back()).empty()) body.pop_back();
  if (body.empty()) throw Unsalvageable("no proof body in outline");
  const bool isar = text::first_word(body.front()) == "proof";
  std::vector<std::string> out{make_header(goal)};
  for (auto& l : text::split_lines(dedent_join(body, isar ? "" : "  "))) {
    out.push_back(std::move(l));
  }

  ProofScript script = split_sorry_lines(ProofScript(std::move(out)));
  std::vector<std::string> work = script.lines();
  if (enforce_holes) {
    const Analysis a = analyze(work);
    std::vector<std::string> next;
    for (std::size_t i = 0; i < work.size(); ++i) {
      const std::string ind(text::leading_indent(work[i]));
      if (i > 0 && a.first(i) == "by") {
        next.push_back(ind + "sorry");
      } else if (i > 0 && classify(a, i) == LineClass::kHeadInlineBy) {
        auto j = inline_justification(a, i);
        next.emplace_back(text::trim_right(std::string_view(work[i]).substr(0, j->col)));
        next.push_back(ind + "  sorry");
      } else {
        next.push_back(work[i]);
      }
    }
    work = std::move(next);
  }
  for (int guard = 0; guard < 256 && close_open_branches(work, 0); ++guard) {
  }
  return ProofScript::parse(text::join_lines(work));
}

}  // namespace proofbeam
