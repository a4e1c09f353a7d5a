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

#include <stdexcept>
#include <string>

namespace rfxg {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that should agree do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A precondition on an argument value is violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input file or text stream.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Structural problem in a class hierarchy (cycles, unknown nodes, ...).
class HierarchyError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class TrainingDivergence : public Error {
 public:
  TrainingDivergence(int epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace rfxg
