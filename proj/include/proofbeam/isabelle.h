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

#ifndef PROOFBEAM_ISABELLE_H_
#define PROOFBEAM_ISABELLE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "proofbeam/verifier.h"

namespace proofbeam::isabelle {

// One protocol message: `NAME ARGUMENT`, the argument usually JSON.
struct Message {
  std::string name;
  std::string argument;

  nlohmann::json json() const;  // null when the argument is empty or not JSON
  bool operator==(const Message&) const = default;
};

// Short single-line messages go out as `text\n`; anything else as a decimal
// byte count on its own line followed by exactly that many bytes.
std::string encode(std::string_view name, const nlohmann::json& argument);
std::string encode_raw(std::string_view text);

// Splits a byte stream into messages; feed it whatever the socket returned.
class MessageReader {
 public:
  void feed(std::string_view bytes);
  std::optional<Message> next();
  bool empty() const { return buffer_.empty(); }

 private:
  std::string buffer_;
  std::optional<std::size_t> pending_;  // length of a long message
};

Message parse_message(std::string_view text);

// FINISHED/FAILED payload of `use_theories` as a RawOutcome. Error lines are
// theory lines (0-based); the last `writeln` output is the state text.
RawOutcome outcome_from_use_theories(const nlohmann::json& payload);

// Every `writeln` output of a use_theories payload, in order.
std::vector<std::string> writeln_messages(const nlohmann::json& payload);

// Reads `Quickcheck found a counterexample:` / `Nitpick found a counterexample:`
// followed by `  var = value` lines.
std::optional<CounterexampleReport> parse_counterexample(std::string_view output);

// Theory that runs quickcheck then nitpick on a goal.
std::string refutation_theory(std::string_view goal);

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 0;
  std::string password;
  std::string session = "HOL";
  std::string work_dir;  // defaults to a fresh temporary directory
};

// VerifierBackend over a running `isabelle server`. One session, started on
// construction and on restart(); calls are serialized.
class ServerBackend : public VerifierBackend {
 public:
  // Throws BackendUnavailable when the server cannot be reached.
  explicit ServerBackend(ServerConfig config);
  ~ServerBackend() override;

  RawOutcome check_theory(std::string_view theory, Millis timeout) override;
  void restart() override;
  std::optional<CounterexampleReport> refute(std::string_view goal_or_state,
                                             Millis timeout) override;
  std::string name() const override { return "isabelle"; }
  bool requires_serialization() const override { return true; }

 private:
  void connect();
  void disconnect();
  void send(const std::string& bytes);
  Message receive(Millis timeout);
  // Writes and loads the scratch theory; returns FINISHED, FAILED or TIMEOUT.
  Message use_theory(std::string_view theory, Millis timeout);
  // Sends a command and waits for its OK, then for the task's FINISHED/FAILED.
  Message run_task(std::string_view name, const nlohmann::json& argument, Millis timeout);

  ServerConfig config_;
  int fd_ = -1;
  MessageReader reader_;
  std::string session_id_;
  std::uint64_t theories_ = 0;
};

}  // namespace proofbeam::isabelle

#endif  // PROOFBEAM_ISABELLE_H_
