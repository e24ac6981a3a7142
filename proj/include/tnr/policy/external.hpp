#pragma once

// Adapter for a policy running as a child process. The child reads request
// frames on stdin and writes response frames on stdout. A frame is the
// payload length in ASCII decimal, a newline, then that many bytes of UTF-8
// JSON. Requests carry an observation document, responses a plan document.

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "tnr/policy/policy.hpp"

namespace tnr {

inline constexpr std::size_t kMaxFrameBytes = 16u << 20;

inline std::string encode_frame(const std::string& payload) { return std::to_string(payload.size()) + "\n" + payload; }

// Incremental decoder. feed() bytes as they arrive and call next() until it
// yields nothing. A bad header throws std::runtime_error.
class FrameDecoder {
 public:
  void feed(std::string_view bytes) { buf_.append(bytes); }

  std::optional<std::string> next() {
    auto nl = buf_.find('\n');
    if (nl == std::string::npos) {
      if (buf_.size() > 20) throw std::runtime_error("frame header too long");
      return std::nullopt;
    }
    if (nl == 0 || nl > 20) throw std::runtime_error("bad frame header");
    std::size_t len = 0;
    for (std::size_t i = 0; i < nl; ++i) {
      char c = buf_[i];
      if (c < '0' || c > '9') throw std::runtime_error("bad frame header");
      len = len * 10 + static_cast<std::size_t>(c - '0');
      if (len > kMaxFrameBytes) throw std::runtime_error("frame too large");
    }
    if (buf_.size() < nl + 1 + len) return std::nullopt;
    std::string payload = buf_.substr(nl + 1, len);
    buf_.erase(0, nl + 1 + len);
    return payload;
  }

  bool idle() const { return buf_.empty(); }

 private:
  std::string buf_;
};

class ExternalPolicy : public Policy {
 public:
  ExternalPolicy(std::vector<std::string> argv, int timeout_ms = 5000)
      : argv_(std::move(argv)), timeout_ms_(timeout_ms) {}
  ~ExternalPolicy() override { stop(); }
  ExternalPolicy(const ExternalPolicy&) = delete;
  ExternalPolicy& operator=(const ExternalPolicy&) = delete;

  std::string name() const override { return "external:" + (argv_.empty() ? std::string() : argv_[0]); }

  Expected<MitigationPlan, PolicyError> propose(const ObservationBundle& o) override {
    if (fd_ < 0 && !start())
      return unexpected(PolicyError{PolicyErrorCode::ProtocolTimeout, "cannot start external policy"});
    if (!send_all(encode_frame(to_json(o).dump()))) {
      stop();
      return unexpected(PolicyError{PolicyErrorCode::ProtocolTimeout, "external policy closed its input"});
    }
    std::optional<std::string> reply;
    try {
      reply = receive();
    } catch (const std::runtime_error& e) {
      stop();
      return unexpected(PolicyError{PolicyErrorCode::MalformedPlan, e.what()});
    }
    if (!reply) {
      // a late answer would desynchronize the stream; start fresh next round
      stop();
      return unexpected(PolicyError{PolicyErrorCode::ProtocolTimeout, "no response within " +
                                                                          std::to_string(timeout_ms_) + " ms"});
    }
    nlohmann::json j = nlohmann::json::parse(*reply, nullptr, false);
    if (j.is_discarded()) return unexpected(PolicyError{PolicyErrorCode::MalformedPlan, "response is not JSON"});
    auto plan = plan_from_json(j);
    if (!plan) return plan;
    auto cmds = validate_plan(*plan);
    if (!cmds) return unexpected(cmds.error());
    return plan;
  }

 private:
  bool start() {
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) return false;
    pid_t pid = ::fork();
    if (pid < 0) {
      ::close(sv[0]);
      ::close(sv[1]);
      return false;
    }
    if (pid == 0) {
      ::dup2(sv[1], 0);
      ::dup2(sv[1], 1);
      std::vector<char*> args;
      for (auto& a : argv_) args.push_back(a.data());
      args.push_back(nullptr);
      ::execvp(args[0], args.data());
      ::_exit(127);
    }
    ::close(sv[1]);
    fd_ = sv[0];
    pid_ = pid;
    decoder_ = FrameDecoder{};
    return true;
  }

  void stop() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
    pid_ = -1;
  }

  bool send_all(const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
      ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

  std::optional<std::string> receive() {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::milliseconds(timeout_ms_);
    for (;;) {
      if (auto f = decoder_.next()) return f;
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
      if (left <= 0) return std::nullopt;
      pollfd p{fd_, POLLIN, 0};
      int r = ::poll(&p, 1, static_cast<int>(left));
      if (r < 0 && errno == EINTR) continue;
      if (r <= 0) return std::nullopt;
      char buf[4096];
      ssize_t n = ::read(fd_, buf, sizeof buf);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return std::nullopt;
      decoder_.feed(std::string_view(buf, static_cast<std::size_t>(n)));
    }
  }

  std::vector<std::string> argv_;
  int timeout_ms_;
  int fd_ = -1;
  pid_t pid_ = -1;
  FrameDecoder decoder_;
};

}  // namespace tnr
