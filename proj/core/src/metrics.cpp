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

#include "rfxg/metrics.hpp"

#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "rfxg/error.hpp"
#include "rfxg/perturbation.hpp"

namespace rfxg {
namespace {

using Integrand = std::function<double(const std::vector<double>& clean,
                                       const std::vector<double>& perturbed)>;

MetricScore integrate(const PerturbationProbes& probes, const Integrand& value) {
  MetricScore out;
  out.curve.alphas = probes.alphas;
  for (const auto& p : probes.perturbed) out.curve.scores.push_back(value(probes.clean, p));
  out.auc = curve_auc(out.curve);
  out.score = 100.0 * out.auc;
  return out;
}

void check_class(const PerturbationProbes& probes, std::size_t c) {
  if (c >= probes.clean.size()) {
    throw InvalidArgument(fmt::format("class {} outside {} scorer classes", c, probes.clean.size()));
  }
}

void check_group(const PerturbationProbes& probes, const std::vector<std::size_t>& g) {
  if (g.empty()) throw InvalidArgument("metric group is empty");
  for (std::size_t c : g) check_class(probes, c);
}

// mean_{k in group} (to[k] - from[k])
double mean_change(const std::vector<std::size_t>& group, const std::vector<double>& from,
                   const std::vector<double>& to) {
  double total = 0.0;
  for (std::size_t k : group) total += to[k] - from[k];
  return total / static_cast<double>(group.size());
}

}  // namespace

std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::kCcs:
      return "CCS";
    case Metric::kCgc:
      return "CGC";
    case Metric::kPgs:
      return "PGS";
    case Metric::kCgs:
      return "CGS";
    case Metric::kDeletion:
      return "Deletion";
  }
  return "unknown";
}

Metric parse_metric(const std::string& name) {
  for (auto m : {Metric::kCcs, Metric::kCgc, Metric::kPgs, Metric::kCgs, Metric::kDeletion}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidArgument(fmt::format("unknown metric '{}'", name));
}

PerturbationProbes probe_perturbations(const Scorer& scorer, const ImageTensor& image,
                                       const SaliencyMap& map, const MetricOptions& options) {
  if (map.height() != image.height() || map.width() != image.width()) {
    throw DimensionError(fmt::format("saliency {}x{} does not match image {}x{}", map.height(),
                                     map.width(), image.height(), image.width()));
  }
  PerturbationProbes probes;
  probes.alphas = options.schedule.alphas();
  probes.clean = scorer.probabilities(image);
  if (probes.clean.size() != scorer.class_count()) {
    throw DimensionError("scorer returned the wrong number of probabilities");
  }
  for (double alpha : probes.alphas) {
    const auto mask = top_alpha_mask(map, alpha);
    probes.perturbed.push_back(scorer.probabilities(apply_mask(image, mask, options.fill)));
    if (probes.perturbed.back().size() != probes.clean.size()) {
      throw DimensionError("scorer returned the wrong number of probabilities");
    }
  }
  return probes;
}

MetricScore ccs(const PerturbationProbes& probes, std::size_t target, std::size_t alternative) {
  check_class(probes, target);
  check_class(probes, alternative);
  return integrate(probes, [&](const auto&, const auto& p) { return p[alternative] - p[target]; });
}

MetricScore cgc(const PerturbationProbes& probes, std::size_t target,
                const std::vector<std::size_t>& rest) {
  check_class(probes, target);
  check_group(probes, rest);
  return integrate(probes, [&](const auto& clean, const auto& p) {
    return 0.5 * (mean_change(rest, clean, p) + (clean[target] - p[target]));
  });
}

MetricScore pgs(const PerturbationProbes& probes, const std::vector<std::size_t>& group) {
  check_group(probes, group);
  return integrate(probes, [&](const auto& clean, const auto& p) {
    return mean_change(group, p, clean);
  });
}

MetricScore cgs(const PerturbationProbes& probes, const std::vector<std::size_t>& group_a,
                const std::vector<std::size_t>& group_b) {
  check_group(probes, group_a);
  check_group(probes, group_b);
  return integrate(probes, [&](const auto& clean, const auto& p) {
    return 0.5 * (mean_change(group_a, p, clean) + mean_change(group_b, clean, p));
  });
}

MetricScore deletion(const PerturbationProbes& probes, std::size_t target) {
  check_class(probes, target);
  return integrate(probes, [&](const auto&, const auto& p) { return p[target]; });
}

MetricScore ccs(const Scorer& scorer, const ImageTensor& image, const SaliencyMap& map,
                std::size_t target, std::size_t alternative, const MetricOptions& options) {
  return ccs(probe_perturbations(scorer, image, map, options), target, alternative);
}

MetricScore cgc(const Scorer& scorer, const ImageTensor& image, const SaliencyMap& map,
                std::size_t target, const std::vector<std::size_t>& rest,
                const MetricOptions& options) {
  return cgc(probe_perturbations(scorer, image, map, options), target, rest);
}

MetricScore pgs(const Scorer& scorer, const ImageTensor& image, const SaliencyMap& map,
                const std::vector<std::size_t>& group, const MetricOptions& options) {
  return pgs(probe_perturbations(scorer, image, map, options), group);
}

MetricScore cgs(const Scorer& scorer, const ImageTensor& image, const SaliencyMap& map,
                const std::vector<std::size_t>& group_a, const std::vector<std::size_t>& group_b,
                const MetricOptions& options) {
  return cgs(probe_perturbations(scorer, image, map, options), group_a, group_b);
}

MetricScore deletion(const Scorer& scorer, const ImageTensor& image, const SaliencyMap& map,
                     std::size_t target, const MetricOptions& options) {
  return deletion(probe_perturbations(scorer, image, map, options), target);
}

MetricResult MetricResult::from_scores(std::string metric, std::vector<double> scores) {
  MetricResult r;
  r.metric = std::move(metric);
  r.count = scores.size();
  double total = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidArgument("metric score is not finite");
    total += s;
  }
  r.mean = scores.empty() ? 0.0 : total / static_cast<double>(scores.size());
  r.scores = std::move(scores);
  return r;
}

}  // namespace rfxg
