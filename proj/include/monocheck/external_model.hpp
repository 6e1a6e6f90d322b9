/*
 * Copyright 2026 The Monocheck Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "monocheck/core.hpp"

// Adapter for a model served by a child process over newline-delimited JSON
// on its stdin/stdout:
//
//   -> {"op":"hello"}                 <- {"features": <int>, "classes": <int>}
//   -> {"op":"predict","x":[...]}     <- {"y": <int rank>}
//   -> {"op":"bye"}                   (then stdin is closed)

namespace monocheck {

class ProtocolError : public ModelError {
 public:
  enum class Kind { kMalformed, kOutOfRange, kTimeout, kProcessExited, kHandshake, kSpawn };

  ProtocolError(Kind kind, const std::string& what) : ModelError(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class ExternalModel : public Model {
 public:
  using Clock = std::chrono::steady_clock;

  // Spawns argv[0] (looked up on PATH) and completes the handshake, which
  // must report the feature space's feature and class counts.
  ExternalModel(std::vector<std::string> argv, const FeatureSpace& fs,
                std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : argv_(std::move(argv)),
        features_(fs.size()),
        classes_(fs.class_count()),
        timeout_(timeout) {
    if (argv_.empty()) throw ProtocolError(ProtocolError::Kind::kSpawn, "empty command");
    spawn();
    handshake();
  }

  ExternalModel(const ExternalModel&) = delete;
  ExternalModel& operator=(const ExternalModel&) = delete;

  ~ExternalModel() override { shutdown(); }

  // One request line, one response line.
  ClassRank predict(std::span<const double> x) const override {
    if (x.size() != features_)
      throw InputError("external model expects " + std::to_string(features_) +
                       " features, got " + std::to_string(x.size()));
    std::lock_guard<std::mutex> lock(mu_);
    nlohmann::json req = {{"op", "predict"}, {"x", std::vector<double>(x.begin(), x.end())}};
    send_line(req.dump());
    const auto resp = parse_object(read_line());
    if (!resp.contains("y") || !resp.at("y").is_number_integer())
      throw ProtocolError(ProtocolError::Kind::kMalformed,
                          "predict response has no integer \"y\": " + resp.dump());
    const auto y = resp.at("y").get<long long>();
    if (y < 0 || static_cast<std::size_t>(y) >= classes_)
      throw ProtocolError(ProtocolError::Kind::kOutOfRange,
                          "predicted rank " + std::to_string(y) + " outside [0, " +
                              std::to_string(classes_ - 1) + "]");
    return static_cast<ClassRank>(y);
  }

  std::size_t feature_count() const { return features_; }
  std::size_t class_count() const { return classes_; }

 private:
  void spawn() {
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds_) != 0)
      throw ProtocolError(ProtocolError::Kind::kSpawn,
                          std::string("socketpair: ") + std::strerror(errno));
    // Built before fork: the child may only make async-signal-safe calls.
    std::vector<char*> args;
    for (auto& a : argv_) args.push_back(a.data());
    args.push_back(nullptr);
    // Reports an exec failure: closed unread on success by O_CLOEXEC.
    int err_pipe[2];
    if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
      ::close(fds_[0]);
      ::close(fds_[1]);
      throw ProtocolError(ProtocolError::Kind::kSpawn,
                          std::string("pipe: ") + std::strerror(errno));
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      const int e = errno;
      for (int fd : {fds_[0], fds_[1], err_pipe[0], err_pipe[1]}) ::close(fd);
      throw ProtocolError(ProtocolError::Kind::kSpawn, std::string("fork: ") + std::strerror(e));
    }
    if (pid_ == 0) {
      ::dup2(fds_[1], STDIN_FILENO);
      ::dup2(fds_[1], STDOUT_FILENO);
      ::execvp(args[0], args.data());
      const int e = errno;
      [[maybe_unused]] auto n = ::write(err_pipe[1], &e, sizeof e);
      ::_exit(127);
    }
    ::close(fds_[1]);
    ::close(err_pipe[1]);
    fd_ = fds_[0];
    int child_errno = 0;
    ssize_t n;
    do {
      n = ::read(err_pipe[0], &child_errno, sizeof child_errno);
    } while (n < 0 && errno == EINTR);
    ::close(err_pipe[0]);
    if (n > 0) {
      kill_child();
      throw ProtocolError(ProtocolError::Kind::kSpawn,
                          "cannot execute '" + argv_[0] + "': " + std::strerror(child_errno));
    }
  }

  void handshake() {
    try {
      send_line(R"({"op":"hello"})");
      const auto resp = parse_object(read_line());
      if (!resp.contains("features") || !resp.contains("classes") ||
          !resp.at("features").is_number_integer() || !resp.at("classes").is_number_integer())
        throw ProtocolError(ProtocolError::Kind::kHandshake,
                            "handshake response lacks integer features/classes: " +
                                resp.dump());
      const auto f = resp.at("features").get<long long>();
      const auto c = resp.at("classes").get<long long>();
      if (f != static_cast<long long>(features_) || c != static_cast<long long>(classes_))
        throw ProtocolError(ProtocolError::Kind::kHandshake,
                            "server reports " + std::to_string(f) + " features / " +
                                std::to_string(c) + " classes, expected " +
                                std::to_string(features_) + " / " +
                                std::to_string(classes_));
    } catch (...) {
      kill_child();
      throw;
    }
  }

  void send_line(const std::string& line) const {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t k = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (k < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(ProtocolError::Kind::kProcessExited,
                            "model process closed its input: " +
                                std::string(std::strerror(errno)));
      }
      off += static_cast<std::size_t>(k);
    }
  }

  std::string read_line() const {
    const auto deadline = Clock::now() + timeout_;
    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (left.count() <= 0)
        throw ProtocolError(ProtocolError::Kind::kTimeout,
                            "no response from model process within " +
                                std::to_string(timeout_.count()) + " ms");
      pollfd p{fd_, POLLIN, 0};
      const int ready = ::poll(&p, 1, static_cast<int>(left.count()));
      if (ready < 0 && errno == EINTR) continue;
      if (ready <= 0) continue;
      char chunk[4096];
      const ssize_t k = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (k < 0 && errno == EINTR) continue;
      if (k <= 0)
        throw ProtocolError(ProtocolError::Kind::kProcessExited,
                            "model process exited" + exit_status());
      buffer_.append(chunk, static_cast<std::size_t>(k));
    }
  }

  static nlohmann::json parse_object(const std::string& line) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw ProtocolError(ProtocolError::Kind::kMalformed, "malformed response line: " + line);
    }
    if (!j.is_object())
      throw ProtocolError(ProtocolError::Kind::kMalformed, "response is not an object: " + line);
    if (j.contains("error"))
      throw ProtocolError(ProtocolError::Kind::kMalformed, "server error: " + j.dump());
    return j;
  }

  std::string exit_status() const {
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_) {
        reaped_ = true;
        if (WIFEXITED(status)) return " with status " + std::to_string(WEXITSTATUS(status));
        if (WIFSIGNALED(status)) return " on signal " + std::to_string(WTERMSIG(status));
        return "";
      }
      ::usleep(2000);
    }
    return "";
  }

  void shutdown() {
    if (fd_ < 0) return;
    try {
      send_line(R"({"op":"bye"})");
    } catch (const ProtocolError&) {
    }
    ::shutdown(fd_, SHUT_WR);
    // Give the server a moment to exit on its own.
    for (int i = 0; i < 100 && !reaped_; ++i) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == pid_) reaped_ = true;
      else ::usleep(1000);
    }
    kill_child();
  }

  void kill_child() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
    if (!reaped_ && pid_ > 0) {
      ::kill(pid_, SIGKILL);
      int status = 0;
      ::waitpid(pid_, &status, 0);
      reaped_ = true;
    }
  }

  std::vector<std::string> argv_;
  std::size_t features_;
  std::size_t classes_;
  std::chrono::milliseconds timeout_;
  int fds_[2] = {-1, -1};
  int fd_ = -1;
  pid_t pid_ = -1;
  mutable bool reaped_ = false;
  mutable std::string buffer_;
  mutable std::mutex mu_;
};

}  // namespace monocheck
