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

#ifndef PROOFBEAM_SCRIPT_H_
#define PROOFBEAM_SCRIPT_H_

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proofbeam/fingerprint.h"

namespace proofbeam {

// Half-open line range [begin, end).
struct LineRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool contains(std::size_t line) const { return begin <= line && line < end; }
  std::size_t size() const { return end - begin; }
  auto operator<=>(const LineRange&) const = default;
};

// A proof document: a lemma/theorem header line followed by proof commands.
// Lines are kept verbatim; render() joins them with '\n'.
class ProofScript {
 public:
  // Throws NoGoalHeader when the first non-blank line is not a declaration
  // carrying a quoted goal.
  explicit ProofScript(std::vector<std::string> lines);

  static ProofScript parse(std::string_view text);

  const std::vector<std::string>& lines() const { return lines_; }
  const std::string& line(std::size_t i) const { return lines_.at(i); }
  std::size_t size() const { return lines_.size(); }
  const std::string& goal() const { return goal_; }
  std::size_t header_line() const { return header_; }

  // Commands after the header, verbatim.
  std::vector<std::string> body() const;
  std::string render() const;

  bool operator==(const ProofScript& other) const { return lines_ == other.lines_; }

 private:
  std::vector<std::string> lines_;
  std::string goal_;
  std::size_t header_ = 0;
};

ProofScript parse_script(std::string_view text);

// `lemma "<goal>"`.
std::string make_header(std::string_view goal);

// Extracts the quoted goal of a declaration line, if it is one.
std::optional<std::string> declaration_goal(std::string_view line);

// One `sorry` occurrence. Character offsets are code points into render().
struct Hole {
  std::size_t start_line = 0;
  std::size_t end_line = 0;
  std::size_t char_begin = 0;
  std::size_t char_end = 0;

  LineRange lines() const { return {start_line, end_line}; }
  auto operator<=>(const Hole&) const = default;
};

// Ordered by position. `sorry` inside comments or string literals is skipped.
std::vector<Hole> find_holes(const ProofScript& script);

inline constexpr std::size_t kHoleWindow = 120;

// SHA1 over the character window [a-w, b+w) of the joined text, truncated to
// 16 hex chars.
Fingerprint hole_id(const ProofScript& script, const Hole& hole,
                    std::size_t window = kHoleWindow);

// Replaces the lines in `span` with `replacement`, re-indented so its least
// indented line sits at the indentation of the first removed line.
ProofScript replace_span(const ProofScript& script, LineRange span,
                         std::string_view replacement);

enum class BlockKind { kHaveShow, kCaseBlock, kSubproof, kWhole };

std::string_view block_kind_name(BlockKind kind);
std::optional<BlockKind> parse_block_kind(std::string_view name);

struct BlockSpan {
  BlockKind kind = BlockKind::kWhole;
  std::size_t start_line = 0;
  std::size_t end_line = 0;

  LineRange lines() const { return {start_line, end_line}; }
  bool operator==(const BlockSpan&) const = default;
};

// Smallest block of `kind` containing `line`. Detection is indentation and
// keyword based.
std::optional<BlockSpan> enclosing_block(const ProofScript& script, std::size_t line,
                                         BlockKind kind);

// Every block of `kind` in the script, in start order.
std::vector<BlockSpan> all_blocks(const ProofScript& script, BlockKind kind);

struct OpenedScript {
  ProofScript script;
  std::vector<Hole> opened;
};

// Replaces each failing tactic line with a `sorry` (or a `proof -`/`sorry`/
// `qed` block when the failing sequence sits directly under a have/show/obtain
// head). `failing_lines` may include script.size() to flag an unfinished proof
// at the end of the script.
OpenedScript open_minimal_sorries(const ProofScript& script,
                                  const std::vector<std::size_t>& failing_lines);

// Tactic lines are the ones open_minimal_sorries knows how to open: `apply`,
// `by`, `done`, `proof <method>`, `qed`, and heads with an inline `by`.
bool is_tactic_line(const ProofScript& script, std::size_t line);

// Removes code fences, surrounding prose and (for kind != whole) a full lemma
// header. Throws EmptyAfterStrip when nothing remains.
std::string strip_to_type(std::string_view block, BlockKind kind);

// Forces the header to `lemma "<goal>"`, terminates incomplete branches with
// `sorry` and, with enforce_holes, turns inline `by` justifications into
// holes. Throws Unsalvageable when no proof body is left.
ProofScript normalize_outline(std::string_view raw, std::string_view goal,
                              bool enforce_holes);

// Puts every `sorry` that shares a line with other commands on its own line.
ProofScript split_sorry_lines(const ProofScript& script);

// True iff the hole sits at the top level of the lemma, outside any Isar
// proof block or have/show/obtain head.
bool is_apply_legal(const ProofScript& script, const Hole& hole);

}  // namespace proofbeam

#endif  // PROOFBEAM_SCRIPT_H_
