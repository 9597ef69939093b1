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

#include <regex>

#include "httplib.h"
#include "proofbeam/error.h"
#include "proofbeam/proposer_backends.h"

namespace proofbeam {

using nlohmann::json;

std::string completion_text(const std::string& body) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return body;
  if (j.is_string()) return j.get<std::string>();
  if (!j.is_object()) return body;
  for (const char* key : {"text", "content", "completion", "response", "output"}) {
    if (j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
  }
  if (j.contains("completions") && j["completions"].is_array()) {
    std::string out;
    for (const auto& c : j["completions"]) {
      if (c.is_string()) out += c.get<std::string>() + "\n";
    }
    return out;
  }
  if (j.contains("choices") && j["choices"].is_array()) {
    std::string out;
    for (const auto& c : j["choices"]) {
      if (c.contains("text") && c["text"].is_string()) {
        out += c["text"].get<std::string>() + "\n";
      } else if (c.contains("message") && c["message"].contains("content")) {
        out += c["message"]["content"].get<std::string>() + "\n";
      }
    }
    return out;
  }
  return {};
}

HttpProposer::HttpProposer(std::string url, Millis timeout)
    : url_(std::move(url)), timeout_(timeout) {}

std::string HttpProposer::complete(const std::string& system, const std::string& user,
                                   double temperature, int n) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url_, m, kUrl)) throw BackendUnavailable("bad proposer url: " + url_);
  const std::string base = m[1].str();
  const std::string path = m[2].matched ? m[2].str() : "/";
  const std::string body =
      json{{"system", system}, {"user", user}, {"temperature", temperature}, {"n", n}}.dump();
  httplib::Client client(base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_).count();
  client.set_connection_timeout(std::max<std::int64_t>(1, secs), 0);
  client.set_read_timeout(std::max<std::int64_t>(1, secs), 0);
  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto res = client.Post(path, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      throw BackendUnavailable("proposer returned HTTP " + std::to_string(res->status));
    }
    return completion_text(res->body);
  }
  throw BackendUnavailable("proposer unreachable at " + url_ + ": " + last_error);
}

}  // namespace proofbeam
