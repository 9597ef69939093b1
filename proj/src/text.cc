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

#include "proofbeam/text.h"

#include <cctype>

namespace proofbeam::text {

namespace {
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }
bool is_alnum_underscore(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}
}  // namespace

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  while (b < s.size() && is_space(s[b])) ++b;
  std::size_t e = s.size();
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string_view trim_right(std::string_view s) {
  std::size_t e = s.size();
  while (e > 0 && is_space(s[e - 1])) --e;
  return s.substr(0, e);
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t nl = text.find('\n', start);
    std::string_view line =
        text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

std::size_t indent_width(std::string_view line) {
  std::size_t n = 0;
  while (n < line.size() && (line[n] == ' ' || line[n] == '\t')) ++n;
  return n;
}

std::string_view leading_indent(std::string_view line) {
  return line.substr(0, indent_width(line));
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending = true;
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() > 1) out.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    if (is_alnum_underscore(c)) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

bool is_word_char(char c) { return is_alnum_underscore(c) || c == '\''; }

std::vector<std::string> identifier_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!(is_word_char(text[i]) || text[i] == '.')) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && (is_word_char(text[j]) || text[j] == '.')) ++j;
    std::string_view tok = text.substr(i, j - i);
    while (!tok.empty() && tok.front() == '.') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == '.') tok.remove_suffix(1);
    if (!tok.empty()) {
      out.emplace_back(tok);
      auto dot = tok.rfind('.');
      if (dot != std::string_view::npos) out.emplace_back(tok.substr(dot + 1));
    }
    i = j;
  }
  return out;
}

std::string_view first_word(std::string_view line) {
  std::string_view t = trim(line);
  std::size_t e = 0;
  while (e < t.size() && !is_space(t[e]) && t[e] != '(' && t[e] != '"') ++e;
  return t.substr(0, e);
}

std::size_t codepoint_count(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::size_t byte_offset(std::string_view s, std::size_t codepoint_index) {
  std::size_t cp = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
      if (cp == codepoint_index) return i;
      ++cp;
    }
  }
  return s.size();
}

}  // namespace proofbeam::text
