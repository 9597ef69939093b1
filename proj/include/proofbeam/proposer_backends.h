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

#ifndef PROOFBEAM_PROPOSER_BACKENDS_H_
#define PROOFBEAM_PROPOSER_BACKENDS_H_

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "proofbeam/mock_backend.h"
#include "proofbeam/proposer.h"

namespace proofbeam {

struct ProposerCall {
  std::string system;
  std::string user;
  double temperature = 0.0;
  int n = 0;
};

// Records every call; thread-safe.
class RecordingProposer : public ProposerBackend {
 public:
  std::vector<ProposerCall> calls() const;
  std::size_t call_count() const;

 protected:
  void record(const std::string& system, const std::string& user, double t, int n);

 private:
  mutable std::mutex mu_;
  std::vector<ProposerCall> calls_;
};

// Replays canned responses. Keys are tried in order: fingerprint of the
// prompt's STATE section, fingerprint of its GOAL section, the literal GOAL
// text, then "*". A value is a string (one response), a list of strings (the
// lines of one response), or {"responses": [...]} replayed in call order and
// sticking at the last entry.
class ScriptedProposer : public RecordingProposer {
 public:
  ScriptedProposer() = default;
  explicit ScriptedProposer(const nlohmann::json& fixture);
  static ScriptedProposer load(const std::string& path);

  void set(const std::string& key, std::vector<std::string> responses);

  std::string complete(const std::string& system, const std::string& user, double temperature,
                       int n) override;
  std::string name() const override { return "scripted"; }

  // Key used for a given state hint or goal text.
  static std::string key_for(std::string_view text);

 private:
  struct Entry {
    std::vector<std::string> responses;
    std::size_t next = 0;
  };
  std::mutex mu_;
  std::map<std::string, Entry> table_;
};

// Wraps a function; handy for adversarial tests.
class FunctionProposer : public RecordingProposer {
 public:
  using Fn = std::function<std::string(const ProposerCall&, std::size_t call_index)>;
  explicit FunctionProposer(Fn fn, std::string name = "function")
      : fn_(std::move(fn)), name_(std::move(name)) {}

  std::string complete(const std::string& system, const std::string& user, double temperature,
                       int n) override;
  std::string name() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
  std::atomic<std::size_t> index_{0};
};

// Proposes the true outgoing edges of the state named in the prompt
// (`STATE <id>`, else the start node of the GOAL), plus `noise` invented
// commands per call. The noise is a function of the seed and the prompt.
class OracleProposer : public RecordingProposer {
 public:
  explicit OracleProposer(const SyntheticSpace& space, int noise = 0, std::uint64_t seed = 0)
      : space_(space), noise_(noise), seed_(seed) {}

  std::string complete(const std::string& system, const std::string& user, double temperature,
                       int n) override;
  std::string name() const override { return "oracle"; }

 private:
  const SyntheticSpace& space_;
  int noise_;
  std::uint64_t seed_;
};

// Posts {system, user, temperature, n} as JSON to a local completion server
// and reads `text`, `content`, `completion`, or every entry of `choices`; a
// non-JSON body is taken verbatim. One retry on transport errors, then
// BackendUnavailable.
class HttpProposer : public ProposerBackend {
 public:
  explicit HttpProposer(std::string url, Millis timeout = Millis(60'000));

  std::string complete(const std::string& system, const std::string& user, double temperature,
                       int n) override;
  std::string name() const override { return "http"; }

 private:
  std::string url_;
  Millis timeout_;
};

// Pulls the completion text out of a server response body.
std::string completion_text(const std::string& body);

}  // namespace proofbeam

#endif  // PROOFBEAM_PROPOSER_BACKENDS_H_
