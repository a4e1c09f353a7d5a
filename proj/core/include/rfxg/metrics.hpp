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
#include <vector>

#include "rfxg/image.hpp"
#include "rfxg/scorer.hpp"

namespace rfxg {

enum class Metric { kCcs, kCgc, kPgs, kCgs, kDeletion };

// "CCS", "CGC", "PGS", "CGS", "Deletion"
std::string to_string(Metric metric);
Metric parse_metric(const std::string& name);

struct MetricOptions {
  PerturbationSchedule schedule = PerturbationSchedule::standard();
  MaskFill fill = MaskFill::black();
};

// Class probabilities of the clean image and of every x_alpha along the
// schedule for one saliency map.
struct PerturbationProbes {
  std::vector<double> alphas;
  std::vector<double> clean;
  std::vector<std::vector<double>> perturbed;
};

PerturbationProbes probe_perturbations(const Scorer& scorer, const ImageTensor& image,
                                       const SaliencyMap& map, const MetricOptions& options);

struct MetricScore {
  PerturbationCurve curve;  // per-alpha integrand, unscaled
  double auc = 0.0;         // curve_auc(curve)
  double score = 0.0;       // 100 * auc
};

// Contrastive class score for a map explaining `target` over `alternative`:
// 100 * AUC[f_alternative(x_a) - f_target(x_a)].
MetricScore ccs(const PerturbationProbes& probes, std::size_t target, std::size_t alternative);
// Class-vs-group contrast: 100 * AUC[1/2 (mean_{k in rest} (f_k(x_a) - f_k(x))
//                                        + f_A(x) - f_A(x_a))].
MetricScore cgc(const PerturbationProbes& probes, std::size_t target,
                const std::vector<std::size_t>& rest);
// Pointwise group: 100 * AUC[mean_{k in group} (f_k(x) - f_k(x_a))].
MetricScore pgs(const PerturbationProbes& probes, const std::vector<std::size_t>& group);
// Contrastive group: 100 * AUC[1/2 (mean_{G_A} (f(x) - f(x_a)) + mean_{G_B} (f(x_a) - f(x)))].
MetricScore cgs(const PerturbationProbes& probes, const std::vector<std::size_t>& group_a,
                const std::vector<std::size_t>& group_b);
// 100 * AUC[f_target(x_a)]; lower is better.
MetricScore deletion(const PerturbationProbes& probes, std::size_t target);

// Convenience overloads that probe first.
MetricScore ccs(const Scorer& scorer, const ImageTensor& image, const SaliencyMap& map,
                std::size_t target, std::size_t alternative, const MetricOptions& options = {});
MetricScore cgc(const Scorer& scorer, const ImageTensor& image, const SaliencyMap& map,
                std::size_t target, const std::vector<std::size_t>& rest,
                const MetricOptions& options = {});
MetricScore pgs(const Scorer& scorer, const ImageTensor& image, const SaliencyMap& map,
                const std::vector<std::size_t>& group, const MetricOptions& options = {});
MetricScore cgs(const Scorer& scorer, const ImageTensor& image, const SaliencyMap& map,
                const std::vector<std::size_t>& group_a, const std::vector<std::size_t>& group_b,
                const MetricOptions& options = {});
MetricScore deletion(const Scorer& scorer, const ImageTensor& image, const SaliencyMap& map,
                     std::size_t target, const MetricOptions& options = {});

// Per-image scores of one metric with their mean.
struct MetricResult {
  std::string metric;
  std::vector<double> scores;
  double mean = 0.0;
  std::size_t count = 0;

  static MetricResult from_scores(std::string metric, std::vector<double> scores);
};

}  // namespace rfxg
