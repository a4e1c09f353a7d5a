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
#include <string>
#include <variant>
#include <vector>

#include "rfxg/objective.hpp"
#include "rfxg/ontology.hpp"

namespace rfxg {

// "Why A?"
struct PointwiseClass {
  std::size_t a = 0;
  friend bool operator==(const PointwiseClass&, const PointwiseClass&) = default;
};
// "Why A and not B?"
struct ContrastiveClass {
  std::size_t a = 0;
  std::size_t b = 0;
  friend bool operator==(const ContrastiveClass&, const ContrastiveClass&) = default;
};
// "Why A and not the classes of G_B?"
struct ClassVsGroup {
  std::size_t a = 0;
  std::vector<std::size_t> group_b;
  friend bool operator==(const ClassVsGroup&, const ClassVsGroup&) = default;
};
// "Why group G?"
struct PointwiseGroup {
  std::vector<std::size_t> group;
  friend bool operator==(const PointwiseGroup&, const PointwiseGroup&) = default;
};
// "Why G_A and not G_B?"
struct ContrastiveGroup {
  std::vector<std::size_t> group_a;
  std::vector<std::size_t> group_b;
  friend bool operator==(const ContrastiveGroup&, const ContrastiveGroup&) = default;
};

using Query =
    std::variant<PointwiseClass, ContrastiveClass, ClassVsGroup, PointwiseGroup, ContrastiveGroup>;

// "pointwise-class", "contrastive-class", "class-vs-group", "pointwise-group"
// or "contrastive-group".
std::string query_kind(const Query& q);
// Canonical text, e.g. "contrastive-class:3/5" or "pointwise-group:0+1+2".
// Contains no commas, tabs or whitespace.
std::string format_query(const Query& q);
// Inverse of format_query. Throws FormatError.
Query parse_query(const std::string& text);

bool is_pointwise(const Query& q);

// Throws InvalidArgument on A == B, A inside G_B, overlapping groups, empty
// groups, duplicate members, or indices >= class_count.
void validate_query(const Query& q, std::size_t class_count);

// Weights over classes: +1 on the explained side, -1 on the contrast side,
// 0 elsewhere.
ObjectiveVector query_to_objective(const Query& q, std::size_t class_count);
ObjectiveVector query_to_objective(const Query& q, const GroupTable& groups);

}  // namespace rfxg
