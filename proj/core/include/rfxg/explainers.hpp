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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfxg/convnet.hpp"
#include "rfxg/image.hpp"
#include "rfxg/objective.hpp"
#include "rfxg/query.hpp"
#include "rfxg/scorer.hpp"

namespace rfxg {

// Mean over channels of |d s / d x|.
SaliencyMap explain_gradient(const GradientScorer& scorer, const ImageTensor& image,
                             const ObjectiveVector& objective,
                             ScoreSpace space = ScoreSpace::kLogits);

// Per-value attributions (x - baseline) * mean_i grad(baseline + t_i (x - baseline))
// with midpoints t_i = (i + 0.5) / steps. Laid out like the image data.
std::vector<double> integrated_gradients(const GradientScorer& scorer, const ImageTensor& image,
                                         const ObjectiveVector& objective,
                                         const ImageTensor& baseline, std::size_t steps,
                                         ScoreSpace space = ScoreSpace::kLogits);

// Spatial map: signed sum of the channel attributions, so the map total
// approximates s(image) - s(baseline). Requires steps >= 8.
SaliencyMap explain_integrated_gradients(const GradientScorer& scorer, const ImageTensor& image,
                                         const ObjectiveVector& objective,
                                         const ImageTensor& baseline, std::size_t steps = 64,
                                         ScoreSpace space = ScoreSpace::kLogits);

struct GradCamGrid {
  std::vector<double> channel_weights;  // alpha_k
  SaliencyMap grid;                     // sum_k alpha_k A^k on the activation grid
};

// Channel weights are the spatial mean of d s / d A^k with s on logits; the
// rectifier is applied to the grid only when apply_relu is set.
GradCamGrid gradcam_grid(const ToyConvNet& model, const ImageTensor& image,
                         const ObjectiveVector& objective, bool apply_relu);
// gradcam_grid resized bilinearly to the image resolution.
SaliencyMap explain_gradcam(const ToyConvNet& model, const ImageTensor& image,
                            const ObjectiveVector& objective, bool apply_relu);

struct OcclusionOptions {
  std::size_t patch = 4;
  std::size_t stride = 2;
  MaskFill fill = MaskFill::black();
  // Remote scorers only expose probabilities.
  ScoreSpace space = ScoreSpace::kProbabilities;
};

// Patch origins along one axis: 0, stride, 2*stride, ... plus a final origin
// flush with the far edge when the stride does not land on it.
std::vector<std::size_t> occlusion_origins(std::size_t extent, std::size_t patch,
                                           std::size_t stride);

// Slides a patch over the image; each placement adds s(x) - s(x_patched) to
// the pixels it covers, and every pixel is divided by its coverage count.
SaliencyMap explain_occlusion(const Scorer& scorer, const ImageTensor& image,
                              const ObjectiveVector& objective,
                              const OcclusionOptions& options = {});
// Same sweep shared across several objectives; one map per objective.
std::vector<SaliencyMap> explain_occlusion(const Scorer& scorer, const ImageTensor& image,
                                           std::span<const ObjectiveVector> objectives,
                                           const OcclusionOptions& options = {});

// Seeded uniform values in [0, 1).
SaliencyMap explain_random(std::size_t height, std::size_t width, std::uint64_t seed);

// Explainer selection used by the harness and the CLI.
enum class ExplainerKind { kGradient, kIntegratedGradients, kGradCam, kOcclusion, kRandom };

// "gradient", "ig", "gradcam", "occlusion", "random"
std::string to_string(ExplainerKind kind);
ExplainerKind parse_explainer(const std::string& name);

struct ExplainerSettings {
  ScoreSpace gradient_space = ScoreSpace::kLogits;
  std::size_t ig_steps = 64;
  // Black image of the input shape when unset.
  std::optional<ImageTensor> ig_baseline;
  OcclusionOptions occlusion;
};

// Explains `query` with the chosen method. Pointwise queries get the usual
// rectified Grad-CAM; contrastive ones keep negative evidence. Throws
// InvalidArgument when the scorer lacks what the method needs (gradients,
// or activations for Grad-CAM).
SaliencyMap explain(ExplainerKind kind, const Scorer& scorer, const ImageTensor& image,
                    const Query& query, const ExplainerSettings& settings,
                    std::uint64_t random_seed = 0);

}  // namespace rfxg
