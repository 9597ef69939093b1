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

#ifndef PROOFBEAM_TEXT_H_
#define PROOFBEAM_TEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by every module. Everything here is pure.
namespace proofbeam::text {

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);

// Splits on '\n'; a trailing '\r' on each line is dropped.
std::vector<std::string> split_lines(std::string_view text);
std::string join_lines(const std::vector<std::string>& lines);

std::size_t indent_width(std::string_view line);
std::string_view leading_indent(std::string_view line);

// Collapses every whitespace run to a single space and trims the ends.
std::string collapse_whitespace(std::string_view s);

// The retrieval tokenizer: split on anything that is not [A-Za-z0-9_],
// lowercase, drop tokens of length 1.
std::vector<std::string> tokenize(std::string_view text);

// Lemma-name style tokens: maximal runs of [A-Za-z0-9_'.]. For a dotted name
// the last component is also emitted, so `List.rev_rev` yields both forms.
std::vector<std::string> identifier_tokens(std::string_view text);

// First whitespace-or-paren delimited word of the trimmed line.
std::string_view first_word(std::string_view line);

bool is_word_char(char c);

// UTF-8 helpers. Offsets are in code points.
std::size_t codepoint_count(std::string_view s);
std::size_t byte_offset(std::string_view s, std::size_t codepoint_index);

}  // namespace proofbeam::text

#endif  // PROOFBEAM_TEXT_H_
