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

#include "proofbeam/isabelle.h"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "proofbeam/error.h"
#include "proofbeam/text.h"

namespace proofbeam::isabelle {

namespace {

constexpr std::string_view kTheoryName = "Scratch";

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::size_t to_theory_line(const nlohmann::json& pos) {
  if (!pos.is_object() || !pos.contains("line") || !pos["line"].is_number_integer()) return 0;
  const long line = pos["line"].get<long>();
  return line > 0 ? static_cast<std::size_t>(line - 1) : 0;
}

}  // namespace

nlohmann::json Message::json() const {
  if (argument.empty()) return nullptr;
  return nlohmann::json::parse(argument, nullptr, /*allow_exceptions=*/false);
}

std::string encode_raw(std::string_view text) {
  if (text.size() < 100 && text.find('\n') == std::string_view::npos) {
    return std::string(text) + '\n';
  }
  return std::to_string(text.size()) + '\n' + std::string(text);
}

std::string encode(std::string_view name, const nlohmann::json& argument) {
  std::string text(name);
  if (!argument.is_null()) text += ' ' + argument.dump();
  return encode_raw(text);
}

Message parse_message(std::string_view text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);
  const std::size_t space = text.find(' ');
  if (space == std::string_view::npos) return {std::string(text), ""};
  return {std::string(text.substr(0, space)), std::string(text.substr(space + 1))};
}

void MessageReader::feed(std::string_view bytes) { buffer_.append(bytes); }

std::optional<Message> MessageReader::next() {
  while (true) {
    if (pending_) {
      if (buffer_.size() < *pending_) return std::nullopt;
      std::string body = buffer_.substr(0, *pending_);
      buffer_.erase(0, *pending_);
      pending_.reset();
      return parse_message(body);
    }
    const std::size_t nl = buffer_.find('\n');
    if (nl == std::string::npos) return std::nullopt;
    std::string line = buffer_.substr(0, nl);
    buffer_.erase(0, nl + 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (all_digits(line)) {
      pending_ = std::stoull(line);
      continue;
    }
    if (line.empty()) continue;
    return parse_message(line);
  }
}

RawOutcome outcome_from_use_theories(const nlohmann::json& payload) {
  RawOutcome out;
  if (!payload.is_object()) {
    out.errors.push_back({0, "malformed use_theories result"});
    return out;
  }
  out.ok = payload.value("ok", false);
  if (payload.contains("errors") && payload["errors"].is_array()) {
    for (const auto& e : payload["errors"]) {
      out.errors.push_back({to_theory_line(e.value("pos", nlohmann::json())),
                            text::collapse_whitespace(e.value("message", std::string()))});
    }
  }
  if (payload.contains("nodes") && payload["nodes"].is_array()) {
    for (const auto& node : payload["nodes"]) {
      if (!node.contains("messages") || !node["messages"].is_array()) continue;
      for (const auto& m : node["messages"]) {
        const std::string kind = m.value("kind", std::string());
        if (kind == "writeln") {
          out.state_text = m.value("message", std::string());
        } else if (kind == "error") {
          LineError e{to_theory_line(m.value("pos", nlohmann::json())),
                      text::collapse_whitespace(m.value("message", std::string()))};
          if (std::find(out.errors.begin(), out.errors.end(), e) == out.errors.end()) {
            out.errors.push_back(std::move(e));
          }
        }
      }
    }
  }
  std::sort(out.errors.begin(), out.errors.end(),
            [](const LineError& a, const LineError& b) { return a.line < b.line; });
  if (!out.errors.empty()) out.ok = false;
  return out;
}

std::vector<std::string> writeln_messages(const nlohmann::json& payload) {
  std::vector<std::string> out;
  if (!payload.is_object() || !payload.contains("nodes") || !payload["nodes"].is_array()) return out;
  for (const auto& node : payload["nodes"]) {
    if (!node.contains("messages") || !node["messages"].is_array()) continue;
    for (const auto& m : node["messages"]) {
      if (m.value("kind", std::string()) == "writeln") out.push_back(m.value("message", std::string()));
    }
  }
  return out;
}

std::optional<CounterexampleReport> parse_counterexample(std::string_view output) {
  static constexpr std::pair<std::string_view, std::string_view> kTools[] = {
      {"Quickcheck found a counterexample:", "quickcheck_like"},
      {"Nitpick found a counterexample", "nitpick_like"},
  };
  for (const auto& [marker, source] : kTools) {
    const std::size_t at = output.find(marker);
    if (at == std::string_view::npos) continue;
    CounterexampleReport report;
    report.source = std::string(source);
    const auto lines = text::split_lines(output.substr(at));
    for (std::size_t i = 1; i < lines.size(); ++i) {
      std::string_view line = text::trim(lines[i]);
      if (line.empty()) {
        if (report.bindings.empty()) continue;
        break;
      }
      if (line.starts_with("Free variable") || line.starts_with("Skolem")) continue;
      const std::size_t eq = line.find(" = ");
      if (eq == std::string_view::npos) break;
      report.bindings.emplace_back(std::string(text::trim(line.substr(0, eq))),
                                   std::string(text::trim(line.substr(eq + 3))));
    }
    if (!report.bindings.empty()) return report;
  }
  return std::nullopt;
}

std::string refutation_theory(std::string_view goal) {
  std::string g(goal);
  std::replace(g.begin(), g.end(), '"', '\'');
  return std::string(kTheoryHeader) + "\nlemma \"" + g + "\"\n  quickcheck\n  nitpick\n  oops\nend";
}

// --- ServerBackend -----------------------------------------------------------

ServerBackend::ServerBackend(ServerConfig config) : config_(std::move(config)) {
  if (config_.work_dir.empty()) {
    config_.work_dir =
        (std::filesystem::temp_directory_path() / ("proofbeam-isabelle-" + std::to_string(::getpid())))
            .string();
  }
  std::filesystem::create_directories(config_.work_dir);
  connect();
}

ServerBackend::~ServerBackend() { disconnect(); }

void ServerBackend::connect() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(config_.port);
  if (::getaddrinfo(config_.host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
    throw BackendUnavailable("cannot resolve " + config_.host);
  }
  for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
    const int fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw BackendUnavailable("cannot connect to " + config_.host + ":" + port);
  reader_ = MessageReader();
  send(encode_raw(config_.password));
  const Message hello = receive(Millis(10'000));
  if (hello.name != "OK") throw BackendUnavailable("server rejected password");
  const Message started =
      run_task("session_start", {{"session", config_.session}}, Millis(600'000));
  const nlohmann::json info = started.json();
  if (started.name != "FINISHED" || !info.is_object() || !info.contains("session_id")) {
    throw BackendUnavailable("session_start failed: " + started.argument);
  }
  session_id_ = info["session_id"].get<std::string>();
}

void ServerBackend::disconnect() {
  if (fd_ < 0) return;
  try {
    if (!session_id_.empty()) send(encode("session_stop", {{"session_id", session_id_}}));
  } catch (const Error&) {
  }
  ::close(fd_);
  fd_ = -1;
  session_id_.clear();
}

void ServerBackend::send(const std::string& bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) throw BackendDown("isabelle server connection lost");
    sent += static_cast<std::size_t>(n);
  }
}

Message ServerBackend::receive(Millis timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (auto m = reader_.next()) return *m;
    const auto left = std::chrono::duration_cast<Millis>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return {"TIMEOUT", ""};
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) throw BackendDown("poll failed");
    if (ready == 0) continue;
    char buf[65536];
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n <= 0) throw BackendDown("isabelle server closed the connection");
    reader_.feed(std::string_view(buf, static_cast<std::size_t>(n)));
  }
}

Message ServerBackend::run_task(std::string_view name, const nlohmann::json& argument,
                                Millis timeout) {
  send(encode(name, argument));
  const Message ack = receive(timeout);
  if (ack.name != "OK") return ack;
  const nlohmann::json task = ack.json();
  const std::string id = task.is_object() ? task.value("task", std::string()) : std::string();
  while (true) {
    Message m = receive(timeout);
    if (m.name == "TIMEOUT") {
      if (!id.empty()) send(encode("cancel", {{"task", id}}));
      return m;
    }
    if (m.name == "NOTE") continue;
    const nlohmann::json j = m.json();
    if ((m.name == "FINISHED" || m.name == "FAILED") &&
        (id.empty() || !j.is_object() || j.value("task", id) == id)) {
      return m;
    }
  }
}

Message ServerBackend::use_theory(std::string_view theory, Millis timeout) {
  if (fd_ < 0) throw BackendDown("no isabelle session");
  const std::filesystem::path file =
      std::filesystem::path(config_.work_dir) / (std::string(kTheoryName) + ".thy");
  {
    std::ofstream out(file, std::ios::trunc);
    out << theory << '\n';
  }
  ++theories_;
  const nlohmann::json args = {{"session_id", session_id_},
                               {"theories", {std::string(kTheoryName)}},
                               {"master_dir", config_.work_dir}};
  Message m = run_task("use_theories", args, timeout);
  send(encode("purge_theories", args));
  (void)receive(Millis(10'000));
  return m;
}

RawOutcome ServerBackend::check_theory(std::string_view theory, Millis timeout) {
  const Message m = use_theory(theory, timeout);
  RawOutcome out;
  if (m.name == "TIMEOUT") {
    out.timed_out = true;
    return out;
  }
  if (m.name != "FINISHED") {
    const nlohmann::json j = m.json();
    out.errors.push_back({0, j.is_object() ? j.value("message", m.argument) : m.argument});
    return out;
  }
  return outcome_from_use_theories(m.json());
}

void ServerBackend::restart() {
  disconnect();
  connect();
}

std::optional<CounterexampleReport> ServerBackend::refute(std::string_view goal_or_state,
                                                          Millis timeout) {
  const std::string target = first_subgoal(goal_or_state).value_or(std::string(goal_or_state));
  const Message m = use_theory(refutation_theory(target), timeout);
  if (m.name != "FINISHED") return std::nullopt;
  for (const std::string& out : writeln_messages(m.json())) {
    if (auto report = parse_counterexample(out)) return report;
  }
  return std::nullopt;
}

}  // namespace proofbeam::isabelle
