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

#include "rfxg/query.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "rfxg/error.hpp"

namespace rfxg {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string join_group(const std::vector<std::size_t>& g) { return fmt::format("{}", fmt::join(g, "+")); }

std::size_t parse_index(const std::string& s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw FormatError(fmt::format("bad class index '{}'", s));
  }
  return std::stoul(s);
}

std::vector<std::size_t> parse_group(const std::string& s) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (true) {
    const auto plus = s.find('+', start);
    out.push_back(parse_index(s.substr(start, plus - start)));
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return out;
}

std::pair<std::string, std::string> split_slash(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos || s.find('/', slash + 1) != std::string::npos) {
    throw FormatError(fmt::format("expected 'x/y' in '{}'", s));
  }
  return {s.substr(0, slash), s.substr(slash + 1)};
}

void check_group(const std::vector<std::size_t>& g, std::size_t class_count, const char* what) {
  if (g.empty()) throw InvalidArgument(fmt::format("{} is empty", what));
  std::set<std::size_t> seen;
  for (std::size_t c : g) {
    if (c >= class_count) throw InvalidArgument(fmt::format("{} holds unknown class {}", what, c));
    if (!seen.insert(c).second) {
      throw InvalidArgument(fmt::format("{} lists class {} twice", what, c));
    }
  }
}

void check_class(std::size_t c, std::size_t class_count) {
  if (c >= class_count) throw InvalidArgument(fmt::format("unknown class {}", c));
}

bool contains(const std::vector<std::size_t>& g, std::size_t c) {
  return std::find(g.begin(), g.end(), c) != g.end();
}

}  // namespace

std::string query_kind(const Query& q) {
  return std::visit(Overloaded{
                        [](const PointwiseClass&) { return std::string("pointwise-class"); },
                        [](const ContrastiveClass&) { return std::string("contrastive-class"); },
                        [](const ClassVsGroup&) { return std::string("class-vs-group"); },
                        [](const PointwiseGroup&) { return std::string("pointwise-group"); },
                        [](const ContrastiveGroup&) { return std::string("contrastive-group"); },
                    },
                    q);
}

std::string format_query(const Query& q) {
  const std::string body = std::visit(
      Overloaded{
          [](const PointwiseClass& v) { return fmt::format("{}", v.a); },
          [](const ContrastiveClass& v) { return fmt::format("{}/{}", v.a, v.b); },
          [](const ClassVsGroup& v) { return fmt::format("{}/{}", v.a, join_group(v.group_b)); },
          [](const PointwiseGroup& v) { return join_group(v.group); },
          [](const ContrastiveGroup& v) {
            return fmt::format("{}/{}", join_group(v.group_a), join_group(v.group_b));
          },
      },
      q);
  return query_kind(q) + ":" + body;
}

Query parse_query(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw FormatError(fmt::format("bad query '{}'", text));
  const std::string kind = text.substr(0, colon);
  const std::string body = text.substr(colon + 1);
  if (kind == "pointwise-class") return PointwiseClass{parse_index(body)};
  if (kind == "contrastive-class") {
    const auto [a, b] = split_slash(body);
    return ContrastiveClass{parse_index(a), parse_index(b)};
  }
  if (kind == "class-vs-group") {
    const auto [a, g] = split_slash(body);
    return ClassVsGroup{parse_index(a), parse_group(g)};
  }
  if (kind == "pointwise-group") return PointwiseGroup{parse_group(body)};
  if (kind == "contrastive-group") {
    const auto [ga, gb] = split_slash(body);
    return ContrastiveGroup{parse_group(ga), parse_group(gb)};
  }
  throw FormatError(fmt::format("unknown query kind '{}'", kind));
}

bool is_pointwise(const Query& q) {
  return std::holds_alternative<PointwiseClass>(q) || std::holds_alternative<PointwiseGroup>(q);
}

void validate_query(const Query& q, std::size_t class_count) {
  std::visit(Overloaded{
                 [&](const PointwiseClass& v) { check_class(v.a, class_count); },
                 [&](const ContrastiveClass& v) {
                   check_class(v.a, class_count);
                   check_class(v.b, class_count);
                   if (v.a == v.b) throw InvalidArgument("contrastive classes must differ");
                 },
                 [&](const ClassVsGroup& v) {
                   check_class(v.a, class_count);
                   check_group(v.group_b, class_count, "contrast group");
                   if (contains(v.group_b, v.a)) {
                     throw InvalidArgument("explained class lies inside the contrast group");
                   }
                 },
                 [&](const PointwiseGroup& v) { check_group(v.group, class_count, "group"); },
                 [&](const ContrastiveGroup& v) {
                   check_group(v.group_a, class_count, "first group");
                   check_group(v.group_b, class_count, "second group");
                   for (std::size_t c : v.group_a) {
                     if (contains(v.group_b, c)) throw InvalidArgument("contrasted groups overlap");
                   }
                 },
             },
             q);
}

ObjectiveVector query_to_objective(const Query& q, std::size_t class_count) {
  validate_query(q, class_count);
  std::vector<double> w(class_count, 0.0);
  std::visit(Overloaded{
                 [&](const PointwiseClass& v) { w[v.a] = 1.0; },
                 [&](const ContrastiveClass& v) {
                   w[v.a] = 1.0;
                   w[v.b] = -1.0;
                 },
                 [&](const ClassVsGroup& v) {
                   w[v.a] = 1.0;
                   for (std::size_t c : v.group_b) w[c] = -1.0;
                 },
                 [&](const PointwiseGroup& v) {
                   for (std::size_t c : v.group) w[c] = 1.0;
                 },
                 [&](const ContrastiveGroup& v) {
                   for (std::size_t c : v.group_a) w[c] = 1.0;
                   for (std::size_t c : v.group_b) w[c] = -1.0;
                 },
             },
             q);
  return ObjectiveVector(std::move(w));
}

ObjectiveVector query_to_objective(const Query& q, const GroupTable& groups) {
  return query_to_objective(q, groups.class_count());
}

// ---------------------------------------------------------------------------
// ObjectiveVector

ObjectiveVector::ObjectiveVector(std::vector<double> weights) : weights_(std::move(weights)) {
  bool any = false;
  for (double v : weights_) {
    if (!std::isfinite(v)) throw InvalidArgument("objective weight is not finite");
    any = any || v != 0.0;
  }
  if (!any) throw InvalidArgument("objective weights are all zero");
}

ObjectiveVector ObjectiveVector::single(std::size_t class_count, std::size_t cls) {
  check_class(cls, class_count);
  std::vector<double> w(class_count, 0.0);
  w[cls] = 1.0;
  return ObjectiveVector(std::move(w));
}

ObjectiveVector ObjectiveVector::operator-() const { return scaled(-1.0); }

ObjectiveVector ObjectiveVector::scaled(double factor) const {
  std::vector<double> w = weights_;
  for (double& v : w) v *= factor;
  return ObjectiveVector(std::move(w));
}

ObjectiveVector operator+(const ObjectiveVector& a, const ObjectiveVector& b) {
  if (a.size() != b.size()) throw DimensionError("objective lengths differ");
  std::vector<double> w(a.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = a[i] + b[i];
  return ObjectiveVector(std::move(w));
}

ObjectiveVector operator-(const ObjectiveVector& a, const ObjectiveVector& b) { return a + (-b); }

double ObjectiveVector::evaluate(std::span<const double> scores) const {
  if (scores.size() != weights_.size()) throw DimensionError("score vector length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) s += weights_[i] * scores[i];
  return s;
}

}  // namespace rfxg
