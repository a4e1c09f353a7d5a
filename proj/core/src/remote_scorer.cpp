/*
 * Copyright 2026 The rfxg Authors.
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

#include "rfxg/remote_scorer.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>
#include <json.hpp>

#include "rfxg/base64.hpp"

namespace rfxg {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

json parse_reply(const std::string& line) {
  json reply;
  try {
    reply = json::parse(line);
  } catch (const json::exception& e) {
    throw BridgeError(BridgeErrorKind::kMalformedFrame,
                      fmt::format("bridge reply is not JSON: {}", e.what()));
  }
  if (!reply.is_object()) {
    throw BridgeError(BridgeErrorKind::kMalformedFrame, "bridge reply is not a JSON object");
  }
  if (reply.contains("error")) {
    const auto& err = reply["error"];
    std::string code = "UNKNOWN", message;
    if (err.is_object()) {
      if (err.contains("code") && err["code"].is_string()) code = err["code"].get<std::string>();
      if (err.contains("message") && err["message"].is_string()) {
        message = err["message"].get<std::string>();
      }
    } else if (err.is_string()) {
      code = err.get<std::string>();
    }
    throw BridgeError(BridgeErrorKind::kRemote, fmt::format("bridge error {}: {}", code, message),
                      code);
  }
  return reply;
}

std::vector<double> payload(const json& reply, const char* key, std::size_t expected) {
  if (!reply.contains(key) || !reply[key].is_string()) {
    throw BridgeError(BridgeErrorKind::kMalformedFrame,
                      fmt::format("bridge reply lacks a '{}' payload", key));
  }
  std::vector<double> values;
  try {
    values = decode_f32(reply[key].get<std::string>());
  } catch (const FormatError& e) {
    throw BridgeError(BridgeErrorKind::kMalformedFrame,
                      fmt::format("bad '{}' payload: {}", key, e.what()));
  }
  if (values.size() != expected) {
    const auto kind = std::string(key) == "probs" ? BridgeErrorKind::kProbabilityValidation
                                                  : BridgeErrorKind::kMalformedFrame;
    throw BridgeError(kind, fmt::format("'{}' payload has {} values, expected {}", key,
                                        values.size(), expected));
  }
  return values;
}

json image_request(const char* op, const ImageTensor& image) {
  json req;
  req["op"] = op;
  req["shape"] = {image.height(), image.width(), image.channels()};
  req["image"] = encode_f32(image.data());
  return req;
}

}  // namespace

std::string to_string(BridgeErrorKind kind) {
  switch (kind) {
    case BridgeErrorKind::kHandshakeTimeout:
      return "handshake-timeout";
    case BridgeErrorKind::kRequestTimeout:
      return "request-timeout";
    case BridgeErrorKind::kMalformedFrame:
      return "malformed-frame";
    case BridgeErrorKind::kProbabilityValidation:
      return "probability-validation";
    case BridgeErrorKind::kTransport:
      return "transport";
    case BridgeErrorKind::kRemote:
      return "remote-error";
    case BridgeErrorKind::kUnsupported:
      return "unsupported";
  }
  return "unknown";
}

RemoteScorer::RemoteScorer(pid_t pid, int fd, RemoteScorerOptions options)
    : pid_(pid), fd_(fd), options_(options) {}

std::unique_ptr<RemoteScorer> RemoteScorer::launch(const std::string& command,
                                                   const RemoteScorerOptions& options) {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw BridgeError(BridgeErrorKind::kTransport,
                      fmt::format("socketpair failed: {}", std::strerror(errno)));
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw BridgeError(BridgeErrorKind::kTransport, fmt::format("fork failed: {}", std::strerror(errno)));
  }
  if (pid == 0) {
    ::dup2(fds[1], STDIN_FILENO);
    ::dup2(fds[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fds[1]);
  std::unique_ptr<RemoteScorer> scorer(new RemoteScorer(pid, fds[0], options));

  scorer->send_line(R"({"op":"hello"})");
  const std::string line =
      scorer->read_line(options.handshake_timeout, BridgeErrorKind::kHandshakeTimeout);
  const json hello = parse_reply(line);
  if (!hello.contains("classes") || !hello["classes"].is_number_unsigned() ||
      hello["classes"].get<std::size_t>() < 2) {
    throw BridgeError(BridgeErrorKind::kMalformedFrame, "hello reply lacks a class count >= 2");
  }
  scorer->classes_ = hello["classes"].get<std::size_t>();
  bool forward = false;
  if (hello.contains("caps") && hello["caps"].is_array()) {
    for (const auto& cap : hello["caps"]) {
      if (cap == "forward") forward = true;
      if (cap == "grad") scorer->grad_capable_ = true;
    }
  }
  if (!forward) throw BridgeError(BridgeErrorKind::kUnsupported, "bridge does not offer forward");
  if (hello.contains("version") && hello["version"].is_number_integer()) {
    scorer->version_ = hello["version"].get<int>();
  }
  return scorer;
}

RemoteScorer::~RemoteScorer() { shutdown(); }

void RemoteScorer::shutdown() noexcept {
  if (fd_ >= 0) {
    static constexpr char kBye[] = "{\"op\":\"bye\"}\n";
    (void)::send(fd_, kBye, sizeof(kBye) - 1, MSG_NOSIGNAL);
    ::shutdown(fd_, SHUT_WR);
  }
  if (pid_ > 0) {
    const auto deadline = Clock::now() + std::chrono::seconds(2);
    int status = 0;
    while (::waitpid(pid_, &status, WNOHANG) == 0) {
      if (Clock::now() > deadline) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    pid_ = -1;
  }
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void RemoteScorer::send_line(const std::string& line) const {
  std::string frame = line;
  frame.push_back('\n');
  std::size_t sent = 0;
  while (sent < frame.size()) {
    const ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BridgeError(BridgeErrorKind::kTransport,
                        fmt::format("write to bridge failed: {}", std::strerror(errno)));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string RemoteScorer::read_line(std::chrono::milliseconds timeout,
                                    BridgeErrorKind timeout_kind) const {
  const auto deadline = Clock::now() + timeout;
  while (true) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) {
      throw BridgeError(timeout_kind, "timed out waiting for the bridge");
    }
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw BridgeError(BridgeErrorKind::kTransport, fmt::format("poll failed: {}", std::strerror(errno)));
    }
    if (ready == 0) continue;
    char chunk[65536];
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BridgeError(BridgeErrorKind::kTransport,
                        fmt::format("read from bridge failed: {}", std::strerror(errno)));
    }
    if (n == 0) throw BridgeError(BridgeErrorKind::kTransport, "bridge closed the connection");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string RemoteScorer::request(const std::string& line) const {
  std::lock_guard lock(mutex_);
  if (fd_ < 0) throw BridgeError(BridgeErrorKind::kTransport, "bridge is shut down");
  send_line(line);
  return read_line(options_.request_timeout, BridgeErrorKind::kRequestTimeout);
}

std::string RemoteScorer::exchange_raw(const std::string& line) const { return request(line); }

std::vector<double> RemoteScorer::probabilities(const ImageTensor& image) const {
  const json reply = parse_reply(request(image_request("forward", image).dump()));
  auto probs = payload(reply, "probs", classes_);
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw BridgeError(BridgeErrorKind::kProbabilityValidation, "bridge returned a negative or non-finite probability");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > options_.probability_tolerance) {
    throw BridgeError(BridgeErrorKind::kProbabilityValidation,
                      fmt::format("bridge probabilities sum to {}", total));
  }
  return probs;
}

std::vector<double> RemoteScorer::objective_gradient(const ImageTensor& image,
                                                     std::span<const double> weights,
                                                     ScoreSpace space) const {
  if (!grad_capable_) {
    throw BridgeError(BridgeErrorKind::kUnsupported, "bridge does not offer gradients");
  }
  if (weights.size() != classes_) {
    throw DimensionError(fmt::format("objective has {} weights for {} classes", weights.size(), classes_));
  }
  json req = image_request("grad", image);
  req["weights"] = std::vector<double>(weights.begin(), weights.end());
  req["on_logits"] = space == ScoreSpace::kLogits;
  const json reply = parse_reply(request(req.dump()));
  return payload(reply, "grad", image.size());
}

}  // namespace rfxg
