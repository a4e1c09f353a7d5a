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

#include "rfxg/image.hpp"

namespace rfxg {

// Number of pixels selected for a fraction alpha of n pixels:
// round-half-up(alpha * n).
std::size_t top_alpha_count(double alpha, std::size_t n);

// Selects the top_alpha_count(alpha, H*W) most salient pixels. Ties are
// broken by ascending linear index, so masks for increasing alpha nest.
PerturbationMask top_alpha_mask(const SaliencyMap& map, double alpha);

// Replaces every channel of each masked pixel according to `fill`; other
// pixels are copied unchanged. With Black this is x * (1 - M) elementwise.
ImageTensor apply_mask(const ImageTensor& image, const PerturbationMask& mask,
                       const MaskFill& fill);

// Trapezoidal area under the curve divided by the alpha span, i.e. the
// mean height of the curve. Requires at least two points.
double curve_auc(const PerturbationCurve& curve);

// Separable Gaussian convolution with a normalized kernel of half-width
// `radius` and symmetric (edge-repeating) reflection at the borders.
ImageTensor gaussian_blur(const ImageTensor& image, double sigma, int radius);

// Bilinear interpolation with the align-corners=false convention.
SaliencyMap bilinear_resize(const SaliencyMap& map, std::size_t new_height,
                            std::size_t new_width);

}  // namespace rfxg
