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

#include "rfxg/scorer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rfxg/error.hpp"

namespace rfxg {

double Scorer::objective(const ImageTensor& image, std::span<const double> weights,
                         ScoreSpace space) const {
  if (weights.size() != class_count()) {
    throw DimensionError(fmt::format("objective has {} weights for {} classes",
                                     weights.size(), class_count()));
  }
  std::vector<double> scores;
  if (space == ScoreSpace::kLogits) {
    auto z = logits(image);
    if (!z) throw InvalidArgument("scorer does not expose logits");
    scores = std::move(*z);
  } else {
    scores = probabilities(image);
  }
  double s = 0.0;
  for (std::size_t c = 0; c < weights.size(); ++c) s += weights[c] * scores[c];
  return s;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace rfxg
