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

#include <cstddef>
#include <span>
#include <vector>

namespace rfxg {

// Which class scores an objective is taken over: pre-softmax logits or
// softmax probabilities.
enum class ScoreSpace { kLogits, kProbabilities };

// Weights w over classes defining the scalar score s = sum_c w_c * f_c.
// Never all zero; every weight finite.
class ObjectiveVector {
 public:
  explicit ObjectiveVector(std::vector<double> weights);
  // Unit weight on a single class.
  static ObjectiveVector single(std::size_t class_count, std::size_t cls);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t c) const { return weights_[c]; }
  std::span<const double> weights() const { return weights_; }

  ObjectiveVector operator-() const;
  ObjectiveVector scaled(double factor) const;
  friend ObjectiveVector operator+(const ObjectiveVector& a, const ObjectiveVector& b);
  friend ObjectiveVector operator-(const ObjectiveVector& a, const ObjectiveVector& b);
  friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;

  // sum_c w_c * scores[c]
  double evaluate(std::span<const double> scores) const;

 private:
  std::vector<double> weights_;
};

}  // namespace rfxg
