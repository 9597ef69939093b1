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

#include "proofbeam/fingerprint.h"

#include <openssl/evp.h>

#include <array>

#include "proofbeam/text.h"

namespace proofbeam {

std::string sha1_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha1(), nullptr);
  std::string_view digest(reinterpret_cast<const char*>(md.data()), len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * digest.size());
  for (char ch : digest) {
    auto b = static_cast<unsigned char>(ch);
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

std::string normalize_state(std::string_view text) {
  std::string out;
  for (const std::string& raw : text::split_lines(text)) {
    std::string line;
    bool in_run = false;
    for (char c : raw) {
      if (c == ' ' || c == '\t') {
        if (!in_run) line.push_back(' ');
        in_run = true;
      } else {
        line.push_back(c);
        in_run = false;
      }
    }
    std::string_view kept = text::trim_right(line);
    if (kept.empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out += kept;
  }
  return out;
}

Fingerprint state_fingerprint(std::string_view hint) {
  return Fingerprint::of(normalize_state(hint));
}

}  // namespace proofbeam
