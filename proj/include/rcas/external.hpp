// Copyright 2026 The RCAS Authors
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

// Objective backed by an external evaluator process speaking newline-delimited
// JSON over its stdin/stdout:
//
//   -> {"cmd":"hello","version":1}
//   <- {"cmd":"hello","version":1,"name":"..."}
//   -> {"id":7,"cmd":"eval","assignment":[{"position":0,"type":3}],"fidelity":0.1}
//   <- {"id":7,"accuracy":0.5831}        or  {"id":7,"error":"..."}
//   -> {"cmd":"shutdown"}
//
// One request is outstanding at a time. Protocol violations and timeouts kill
// the session; an {"error":...} reply fails only that request.

#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "rcas/domain.hpp"
#include "rcas/error.hpp"
#include "rcas/objective.hpp"

namespace rcas {

inline constexpr int kProtocolVersion = 1;

class ExternalEvaluator final : public Objective {
 public:
  ExternalEvaluator(std::vector<std::string> argv, std::chrono::milliseconds timeout)
      : argv_(std::move(argv)), timeout_(timeout) {
    if (argv_.empty()) throw ConfigError("external evaluator command is empty");
    static std::once_flag ignore_sigpipe;
    std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });
    spawn();
    handshake();
  }

  ExternalEvaluator(const ExternalEvaluator&) = delete;
  ExternalEvaluator& operator=(const ExternalEvaluator&) = delete;

  ~ExternalEvaluator() override { shutdown(); }

  std::string name() const override { return name_; }
  bool concurrency_safe() const override { return false; }
  EvalSource source() const override { return EvalSource::external; }
  bool alive() const { return alive_; }
  std::uint64_t last_id() const { return next_id_ - 1; }

  double compute(const Assignment& a, Fidelity fidelity) override {
    std::lock_guard lock(mu_);
    if (!alive_) throw EvaluatorFailure("evaluator session is dead: " + death_);
    const std::uint64_t id = next_id_++;
    send(json{{"id", id}, {"cmd", "eval"}, {"assignment", assignment_list_json(a)}, {"fidelity", fidelity.level}});
    const std::string line = read_line();
    json reply;
    try {
      reply = json::parse(line);
    } catch (const json::exception&) {
      fail<ProtocolError>("malformed response line", line);
    }
    if (!reply.is_object() || !reply.contains("id") || !reply["id"].is_number_unsigned() ||
        reply["id"].get<std::uint64_t>() != id) {
      fail<ProtocolError>("response does not echo request id " + std::to_string(id), line);
    }
    if (reply.contains("error")) {
      throw EvaluatorFailure("evaluator error: " + reply["error"].dump(), line);
    }
    if (!reply.contains("accuracy") || !reply["accuracy"].is_number()) {
      fail<ProtocolError>("response has neither accuracy nor error", line);
    }
    return reply["accuracy"].get<double>();
  }

 private:
  template <typename E>
  [[noreturn]] void fail(const std::string& what, const std::string& payload = {}) {
    death_ = what;
    kill_child();
    throw E(what, payload);
  }

  void spawn() {
    int to_child[2], from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw HandshakeFailure(std::string("pipe: ") + std::strerror(errno));
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw HandshakeFailure(std::string("pipe: ") + std::strerror(errno));
    }
    std::vector<char*> args;
    for (auto& s : argv_) args.push_back(s.data());
    args.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) throw HandshakeFailure(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::execvp(args[0], args.data());
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_ = to_child[1];
    out_ = from_child[0];
    alive_ = true;
  }

  void handshake() {
    std::string line;
    try {
      send(json{{"cmd", "hello"}, {"version", kProtocolVersion}});
      line = read_line();
    } catch (const EvaluatorFailure& e) {
      fail<HandshakeFailure>(std::string("handshake failed: ") + e.what(), e.payload());
    }
    json reply;
    try {
      reply = json::parse(line);
    } catch (const json::exception&) {
      fail<HandshakeFailure>("handshake reply is not JSON", line);
    }
    if (!reply.is_object() || reply.value("cmd", std::string{}) != "hello") {
      fail<HandshakeFailure>("handshake reply is not a hello", line);
    }
    if (!reply.contains("version") || !reply["version"].is_number_integer() ||
        reply["version"].get<int>() != kProtocolVersion) {
      fail<HandshakeFailure>("protocol version mismatch (want " + std::to_string(kProtocolVersion) + ")", line);
    }
    if (!reply.contains("name") || !reply["name"].is_string()) {
      fail<HandshakeFailure>("handshake reply lacks a name", line);
    }
    name_ = reply["name"].get<std::string>();
  }

  void send(const json& message) {
    const std::string line = message.dump() + "\n";
    std::size_t done = 0;
    while (done < line.size()) {
      const ssize_t n = ::write(in_, line.data() + done, line.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail<EvaluatorFailure>(std::string("write to evaluator failed: ") + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    while (true) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        fail<Timeout>("evaluator did not answer within " + std::to_string(timeout_.count()) + " ms", buffer_);
      }
      pollfd pfd{out_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        fail<EvaluatorFailure>(std::string("poll failed: ") + std::strerror(errno));
      }
      if (ready == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(out_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail<EvaluatorFailure>(std::string("read from evaluator failed: ") + std::strerror(errno));
      }
      if (n == 0) fail<EvaluatorFailure>("evaluator closed its output", buffer_);
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void close_pipes() {
    if (in_ >= 0) ::close(in_);
    if (out_ >= 0) ::close(out_);
    in_ = out_ = -1;
  }

  void kill_child() {
    alive_ = false;
    close_pipes();
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

  void shutdown() {
    if (pid_ <= 0) return;
    if (alive_) {
      const std::string bye = json{{"cmd", "shutdown"}}.dump() + "\n";
      [[maybe_unused]] const ssize_t n = ::write(in_, bye.data(), bye.size());
    }
    alive_ = false;
    close_pipes();
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }

  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
  std::mutex mu_;
  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  bool alive_ = false;
  std::string death_;
  std::string buffer_;
  std::string name_;
  std::uint64_t next_id_ = 1;
};

}  // namespace rcas
