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

#ifndef PROOFBEAM_FINGERPRINT_H_
#define PROOFBEAM_FINGERPRINT_H_

#include <compare>
#include <string>
#include <string_view>

namespace proofbeam {

// Lowercase hex SHA1 digest (40 chars).
std::string sha1_hex(std::string_view data);

// A SHA1 digest in hex: 40 chars for state fingerprints, the 16-char prefix
// for hole ids and ban-list entries.
class Fingerprint {
 public:
  Fingerprint() = default;
  explicit Fingerprint(std::string hex) : hex_(std::move(hex)) {}

  static Fingerprint of(std::string_view data) { return Fingerprint(sha1_hex(data)); }

  const std::string& hex() const { return hex_; }
  Fingerprint prefix16() const { return Fingerprint(hex_.substr(0, 16)); }
  bool empty() const { return hex_.empty(); }

  auto operator<=>(const Fingerprint&) const = default;

 private:
  std::string hex_;
};

// Collapses space/tab runs to one space, strips trailing whitespace per line
// and drops blank lines. Idempotent.
std::string normalize_state(std::string_view text);

// SHA1(normalize_state(hint)).
Fingerprint state_fingerprint(std::string_view hint);

}  // namespace proofbeam

template <>
struct std::hash<proofbeam::Fingerprint> {
  std::size_t operator()(const proofbeam::Fingerprint& f) const noexcept {
    return std::hash<std::string>{}(f.hex());
  }
};

#endif  // PROOFBEAM_FINGERPRINT_H_
