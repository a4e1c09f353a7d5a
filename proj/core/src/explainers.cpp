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

#include "rfxg/explainers.hpp"

#include <cmath>

#include <fmt/format.h>

#include "rfxg/error.hpp"
#include "rfxg/perturbation.hpp"
#include "rfxg/random.hpp"

namespace rfxg {

SaliencyMap explain_gradient(const GradientScorer& scorer, const ImageTensor& image,
                             const ObjectiveVector& objective, ScoreSpace space) {
  const auto grad = scorer.objective_gradient(image, objective.weights(), space);
  if (grad.size() != image.size()) throw DimensionError("gradient does not match the image");
  const std::size_t ch = image.channels();
  std::vector<double> values(image.pixel_count(), 0.0);
  for (std::size_t p = 0; p < values.size(); ++p) {
    double acc = 0.0;
    for (std::size_t c = 0; c < ch; ++c) acc += std::abs(grad[p * ch + c]);
    values[p] = acc / static_cast<double>(ch);
  }
  return SaliencyMap(image.height(), image.width(), std::move(values));
}

std::vector<double> integrated_gradients(const GradientScorer& scorer, const ImageTensor& image,
                                         const ObjectiveVector& objective,
                                         const ImageTensor& baseline, std::size_t steps,
                                         ScoreSpace space) {
  if (steps < 8) throw InvalidArgument(fmt::format("integrated gradients needs >= 8 steps, got {}", steps));
  if (!baseline.same_shape(image)) throw DimensionError("baseline shape differs from the image");
  const auto x = image.data();
  const auto x0 = baseline.data();
  std::vector<double> mean_grad(x.size(), 0.0);
  std::vector<double> point(x.size());
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(steps);
    for (std::size_t j = 0; j < x.size(); ++j) {
      point[j] = std::clamp(x0[j] + t * (x[j] - x0[j]), 0.0, 1.0);
    }
    const ImageTensor interpolated(image.height(), image.width(), image.channels(), point);
    const auto g = scorer.objective_gradient(interpolated, objective.weights(), space);
    if (g.size() != x.size()) throw DimensionError("gradient does not match the image");
    for (std::size_t j = 0; j < x.size(); ++j) mean_grad[j] += g[j];
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    mean_grad[j] = (x[j] - x0[j]) * mean_grad[j] / static_cast<double>(steps);
  }
  return mean_grad;
}

SaliencyMap explain_integrated_gradients(const GradientScorer& scorer, const ImageTensor& image,
                                         const ObjectiveVector& objective,
                                         const ImageTensor& baseline, std::size_t steps,
                                         ScoreSpace space) {
  const auto attr = integrated_gradients(scorer, image, objective, baseline, steps, space);
  const std::size_t ch = image.channels();
  std::vector<double> values(image.pixel_count(), 0.0);
  for (std::size_t p = 0; p < values.size(); ++p) {
    for (std::size_t c = 0; c < ch; ++c) values[p] += attr[p * ch + c];
  }
  return SaliencyMap(image.height(), image.width(), std::move(values));
}

GradCamGrid gradcam_grid(const ToyConvNet& model, const ImageTensor& image,
                         const ObjectiveVector& objective, bool apply_relu) {
  if (!model.has_target_layer()) throw InvalidArgument("Grad-CAM needs a convolution stage");
  const ForwardRecord rec = model.forward(image);
  const FeatureMaps grads = model.backward_activations(image, objective.weights(), ScoreSpace::kLogits);
  const FeatureMaps& act = rec.activations;
  const std::size_t hw = act.height * act.width;

  GradCamGrid out;
  out.channel_weights.assign(act.channels, 0.0);
  for (std::size_t k = 0; k < act.channels; ++k) {
    double total = 0.0;
    for (std::size_t p = 0; p < hw; ++p) total += grads.values[k * hw + p];
    out.channel_weights[k] = total / static_cast<double>(hw);
  }
  std::vector<double> grid(hw, 0.0);
  for (std::size_t k = 0; k < act.channels; ++k) {
    const double a = out.channel_weights[k];
    for (std::size_t p = 0; p < hw; ++p) grid[p] += a * act.values[k * hw + p];
  }
  if (apply_relu) {
    for (double& v : grid) v = std::max(v, 0.0);
  }
  out.grid = SaliencyMap(act.height, act.width, std::move(grid));
  return out;
}

SaliencyMap explain_gradcam(const ToyConvNet& model, const ImageTensor& image,
                            const ObjectiveVector& objective, bool apply_relu) {
  const auto cam = gradcam_grid(model, image, objective, apply_relu);
  return bilinear_resize(cam.grid, image.height(), image.width());
}

std::vector<std::size_t> occlusion_origins(std::size_t extent, std::size_t patch,
                                           std::size_t stride) {
  if (patch < 1 || stride < 1) throw InvalidArgument("patch and stride must be at least 1");
  if (patch > extent) {
    throw InvalidArgument(fmt::format("patch {} larger than image extent {}", patch, extent));
  }
  std::vector<std::size_t> origins;
  for (std::size_t o = 0; o + patch <= extent; o += stride) origins.push_back(o);
  if (origins.back() + patch < extent) origins.push_back(extent - patch);
  return origins;
}

std::vector<SaliencyMap> explain_occlusion(const Scorer& scorer, const ImageTensor& image,
                                           std::span<const ObjectiveVector> objectives,
                                           const OcclusionOptions& options) {
  const auto rows = occlusion_origins(image.height(), options.patch, options.stride);
  const auto cols = occlusion_origins(image.width(), options.patch, options.stride);
  const std::size_t h = image.height(), w = image.width();

  const auto scores_of = [&](const ImageTensor& x) {
    if (options.space == ScoreSpace::kLogits) {
      auto z = scorer.logits(x);
      if (!z) throw InvalidArgument("occlusion on logits needs a scorer exposing logits");
      return std::move(*z);
    }
    return scorer.probabilities(x);
  };
  const auto base = scores_of(image);
  std::vector<double> base_value;
  for (const auto& obj : objectives) base_value.push_back(obj.evaluate(base));

  std::vector<std::vector<double>> acc(objectives.size(), std::vector<double>(h * w, 0.0));
  std::vector<double> coverage(h * w, 0.0);
  PerturbationMask mask{h, w, 0.0, std::vector<std::uint8_t>(h * w, 0)};
  for (std::size_t r0 : rows) {
    for (std::size_t c0 : cols) {
      std::fill(mask.bits.begin(), mask.bits.end(), 0);
      for (std::size_t y = r0; y < r0 + options.patch; ++y) {
        for (std::size_t x = c0; x < c0 + options.patch; ++x) mask.bits[y * w + x] = 1;
      }
      const auto patched = scores_of(apply_mask(image, mask, options.fill));
      for (std::size_t o = 0; o < objectives.size(); ++o) {
        const double drop = base_value[o] - objectives[o].evaluate(patched);
        for (std::size_t p = 0; p < h * w; ++p) {
          if (mask.bits[p]) acc[o][p] += drop;
        }
      }
      for (std::size_t p = 0; p < h * w; ++p) coverage[p] += mask.bits[p];
    }
  }
  std::vector<SaliencyMap> maps;
  for (auto& values : acc) {
    for (std::size_t p = 0; p < h * w; ++p) values[p] /= coverage[p];
    maps.emplace_back(h, w, std::move(values));
  }
  return maps;
}

SaliencyMap explain_occlusion(const Scorer& scorer, const ImageTensor& image,
                              const ObjectiveVector& objective, const OcclusionOptions& options) {
  return std::move(explain_occlusion(scorer, image, std::span(&objective, 1), options).front());
}

SaliencyMap explain_random(std::size_t height, std::size_t width, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> values(height * width);
  for (double& v : values) v = rng.uniform();
  return SaliencyMap(height, width, std::move(values));
}

std::string to_string(ExplainerKind kind) {
  switch (kind) {
    case ExplainerKind::kGradient:
      return "gradient";
    case ExplainerKind::kIntegratedGradients:
      return "ig";
    case ExplainerKind::kGradCam:
      return "gradcam";
    case ExplainerKind::kOcclusion:
      return "occlusion";
    case ExplainerKind::kRandom:
      return "random";
  }
  return "unknown";
}

ExplainerKind parse_explainer(const std::string& name) {
  for (auto kind : {ExplainerKind::kGradient, ExplainerKind::kIntegratedGradients,
                    ExplainerKind::kGradCam, ExplainerKind::kOcclusion, ExplainerKind::kRandom}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidArgument(fmt::format("unknown explainer '{}'", name));
}

SaliencyMap explain(ExplainerKind kind, const Scorer& scorer, const ImageTensor& image,
                    const Query& query, const ExplainerSettings& settings,
                    std::uint64_t random_seed) {
  if (kind == ExplainerKind::kRandom) {
    return explain_random(image.height(), image.width(), random_seed);
  }
  const ObjectiveVector objective = query_to_objective(query, scorer.class_count());
  switch (kind) {
    case ExplainerKind::kGradient:
    case ExplainerKind::kIntegratedGradients: {
      const auto* grad = dynamic_cast<const GradientScorer*>(&scorer);
      if (!grad) throw InvalidArgument(fmt::format("{} needs a scorer with gradients", to_string(kind)));
      if (kind == ExplainerKind::kGradient) {
        return explain_gradient(*grad, image, objective, settings.gradient_space);
      }
      const ImageTensor baseline =
          settings.ig_baseline ? *settings.ig_baseline
                               : ImageTensor(image.height(), image.width(), image.channels());
      return explain_integrated_gradients(*grad, image, objective, baseline, settings.ig_steps,
                                          settings.gradient_space);
    }
    case ExplainerKind::kGradCam: {
      const auto* model = dynamic_cast<const ToyConvNet*>(&scorer);
      if (!model) throw InvalidArgument("gradcam needs direct access to a local model");
      return explain_gradcam(*model, image, objective, is_pointwise(query));
    }
    case ExplainerKind::kOcclusion:
      return explain_occlusion(scorer, image, objective, settings.occlusion);
    case ExplainerKind::kRandom:
      break;
  }
  throw InvalidArgument("unhandled explainer");
}

}  // namespace rfxg
