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
#include <optional>
#include <span>
#include <vector>

#include "rfxg/image.hpp"
#include "rfxg/objective.hpp"

namespace rfxg {

// Anything that maps an image to class probabilities.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::size_t class_count() const = 0;
  virtual std::vector<double> probabilities(const ImageTensor& image) const = 0;
  // Pre-softmax scores when the scorer exposes them.
  virtual std::optional<std::vector<double>> logits(const ImageTensor&) const {
    return std::nullopt;
  }

  // sum_c weights[c] * score_c in the requested space. Throws
  // InvalidArgument when logits are requested but unavailable.
  double objective(const ImageTensor& image, std::span<const double> weights,
                   ScoreSpace space) const;
};

// A scorer that can also differentiate a weighted class score with respect to
// every input value.
class GradientScorer : public Scorer {
 public:
  // Gradient of sum_c weights[c] * score_c, laid out like the image data.
  virtual std::vector<double> objective_gradient(const ImageTensor& image,
                                                 std::span<const double> weights,
                                                 ScoreSpace space) const = 0;
};

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

}  // namespace rfxg
