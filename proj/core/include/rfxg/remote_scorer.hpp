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

#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <sys/types.h>

#include "rfxg/error.hpp"
#include "rfxg/scorer.hpp"

namespace rfxg {

enum class BridgeErrorKind {
  kHandshakeTimeout,       // no valid hello reply in time
  kRequestTimeout,         // no reply to a later request in time
  kMalformedFrame,         // reply is not the JSON object the protocol defines
  kProbabilityValidation,  // probs of the wrong length, negative, or not summing to 1
  kTransport,              // the child went away or the channel broke
  kRemote,                 // the bridge answered with an error reply
  kUnsupported,            // the bridge did not advertise the capability
};

std::string to_string(BridgeErrorKind kind);

class BridgeError : public Error {
 public:
  BridgeError(BridgeErrorKind kind, const std::string& what, std::string code = {})
      : Error(what), kind_(kind), code_(std::move(code)) {}
  BridgeErrorKind kind() const { return kind_; }
  // Machine-readable code of a bridge error reply (e.g. "SHAPE").
  const std::string& code() const { return code_; }

 private:
  BridgeErrorKind kind_;
  std::string code_;
};

struct RemoteScorerOptions {
  std::chrono::milliseconds handshake_timeout{10000};
  std::chrono::milliseconds request_timeout{120000};
  double probability_tolerance = 1e-4;
};

// Client for a scorer bridge running as a child process. Requests are
// line-delimited JSON on the child's stdin, replies come back on its stdout:
//
//   {"op":"hello"}                                   -> {"classes":C,"caps":["forward","grad"],"version":1}
//   {"op":"forward","shape":[H,W,C],"image":B64}     -> {"probs":B64}
//   {"op":"grad","shape":[H,W,C],"image":B64,
//    "weights":[w...],"on_logits":true}              -> {"grad":B64}
//   {"op":"bye"}                                     -> {"bye":true}
//
// B64 is base64 of little-endian float32 values; images are row-major
// (row, column, channel). Failures come back as {"error":{"code":..,"message":..}}.
// One request is in flight at a time.
class RemoteScorer : public GradientScorer {
 public:
  // Starts `command` through /bin/sh and performs the hello handshake.
  static std::unique_ptr<RemoteScorer> launch(const std::string& command,
                                              const RemoteScorerOptions& options = {});
  ~RemoteScorer() override;

  RemoteScorer(const RemoteScorer&) = delete;
  RemoteScorer& operator=(const RemoteScorer&) = delete;

  std::size_t class_count() const override { return classes_; }
  bool supports_gradient() const { return grad_capable_; }
  int protocol_version() const { return version_; }

  std::vector<double> probabilities(const ImageTensor& image) const override;
  // Throws BridgeError(kUnsupported) when the bridge lacks the grad capability.
  std::vector<double> objective_gradient(const ImageTensor& image, std::span<const double> weights,
                                         ScoreSpace space) const override;

  // Sends raw text as one frame and returns the raw reply line; for tests of
  // the bridge's malformed-frame handling.
  std::string exchange_raw(const std::string& line) const;

 private:
  RemoteScorer(pid_t pid, int fd, RemoteScorerOptions options);
  void send_line(const std::string& line) const;
  std::string read_line(std::chrono::milliseconds timeout, BridgeErrorKind timeout_kind) const;
  std::string request(const std::string& line) const;
  void shutdown() noexcept;

  pid_t pid_ = -1;
  int fd_ = -1;
  RemoteScorerOptions options_;
  std::size_t classes_ = 0;
  bool grad_capable_ = false;
  int version_ = 0;
  mutable std::string buffer_;
  mutable std::mutex mutex_;
};

}  // namespace rfxg
