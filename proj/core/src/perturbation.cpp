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

#include "rfxg/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include "rfxg/error.hpp"
#include "rfxg/random.hpp"

namespace rfxg {
namespace {

// Maps an out-of-range index back into [0, n) by mirroring with the edge
// sample repeated (... 1 0 | 0 1 ... n-1 | n-1 n-2 ...).
std::size_t reflect(long idx, long n) {
  const long period = 2 * n;
  long m = idx % period;
  if (m < 0) m += period;
  if (m >= n) m = period - 1 - m;
  return static_cast<std::size_t>(m);
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  }
  const double total = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= total;
  return k;
}

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::size_t top_alpha_count(double alpha, std::size_t n) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument(fmt::format("alpha {} not in [0, 1]", alpha));
  }
  // The epsilon absorbs representation error in products such as 0.15 * 10.
  const double k = std::floor(alpha * static_cast<double>(n) + 0.5 + 1e-9);
  return std::min(n, static_cast<std::size_t>(k));
}

PerturbationMask top_alpha_mask(const SaliencyMap& map, double alpha) {
  const auto values = map.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw InvalidArgument(
          fmt::format("saliency value at linear index {} is not finite", i));
    }
  }
  const std::size_t k = top_alpha_count(alpha, values.size());

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (values[a] != values[b]) return values[a] > values[b];
                      return a < b;
                    });

  PerturbationMask mask;
  mask.height = map.height();
  mask.width = map.width();
  mask.alpha = alpha;
  mask.bits.assign(values.size(), 0);
  for (std::size_t i = 0; i < k; ++i) mask.bits[order[i]] = 1;
  return mask;
}

ImageTensor apply_mask(const ImageTensor& image, const PerturbationMask& mask,
                       const MaskFill& fill) {
  if (mask.height != image.height() || mask.width != image.width() ||
      mask.bits.size() != image.pixel_count()) {
    throw DimensionError(fmt::format("mask {}x{} does not match image {}x{}",
                                     mask.height, mask.width, image.height(),
                                     image.width()));
  }
  const std::size_t channels = image.channels();
  const std::size_t pixels = image.pixel_count();
  std::vector<double> out(image.data().begin(), image.data().end());

  if (std::holds_alternative<MaskFill::Black>(fill.variant)) {
    for (std::size_t p = 0; p < pixels; ++p) {
      if (!mask.bits[p]) continue;
      for (std::size_t c = 0; c < channels; ++c) out[p * channels + c] = 0.0;
    }
  } else if (std::holds_alternative<MaskFill::MeanColor>(fill.variant)) {
    std::vector<double> mean(channels, 0.0);
    for (std::size_t p = 0; p < pixels; ++p) {
      for (std::size_t c = 0; c < channels; ++c) mean[c] += out[p * channels + c];
    }
    for (double& m : mean) m = clamp_unit(m / static_cast<double>(pixels));
    for (std::size_t p = 0; p < pixels; ++p) {
      if (!mask.bits[p]) continue;
      for (std::size_t c = 0; c < channels; ++c) out[p * channels + c] = mean[c];
    }
  } else if (const auto* noise = std::get_if<MaskFill::UniformNoise>(&fill.variant)) {
    // Full noise field; a pixel's value does not depend on the mask.
    Rng rng(noise->seed);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double v = rng.uniform();
      if (mask.bits[i / channels]) out[i] = v;
    }
  } else {
    const auto& blur = std::get<MaskFill::GaussianBlur>(fill.variant);
    const ImageTensor blurred = gaussian_blur(image, blur.sigma, blur.radius);
    const auto src = blurred.data();
    for (std::size_t p = 0; p < pixels; ++p) {
      if (!mask.bits[p]) continue;
      for (std::size_t c = 0; c < channels; ++c) {
        out[p * channels + c] = src[p * channels + c];
      }
    }
  }
  return ImageTensor(image.height(), image.width(), channels, std::move(out));
}

double curve_auc(const PerturbationCurve& curve) {
  if (curve.alphas.size() != curve.scores.size()) {
    throw DimensionError("curve alphas and scores differ in length");
  }
  if (curve.alphas.size() < 2) {
    throw InvalidArgument("curve_auc needs at least two points");
  }
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < curve.alphas.size(); ++i) {
    const double da = curve.alphas[i + 1] - curve.alphas[i];
    if (!(da > 0.0)) throw InvalidArgument("curve alphas must be strictly increasing");
    area += 0.5 * (curve.scores[i] + curve.scores[i + 1]) * da;
  }
  return area / (curve.alphas.back() - curve.alphas.front());
}

ImageTensor gaussian_blur(const ImageTensor& image, double sigma, int radius) {
  if (!(sigma > 0.0)) throw InvalidArgument("blur sigma must be positive");
  if (radius < 1) throw InvalidArgument("blur radius must be at least 1");
  const auto kernel = gaussian_kernel(sigma, radius);
  const long h = static_cast<long>(image.height());
  const long w = static_cast<long>(image.width());
  const std::size_t ch = image.channels();
  const auto src = image.data();

  std::vector<double> horizontal(src.size(), 0.0);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const std::size_t xx = reflect(x + k, w);
          acc += kernel[k + radius] * src[(y * w + xx) * ch + c];
        }
        horizontal[(y * w + x) * ch + c] = acc;
      }
    }
  }
  std::vector<double> out(src.size(), 0.0);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const std::size_t yy = reflect(y + k, h);
          acc += kernel[k + radius] * horizontal[(yy * w + x) * ch + c];
        }
        out[(y * w + x) * ch + c] = clamp_unit(acc);
      }
    }
  }
  return ImageTensor(image.height(), image.width(), ch, std::move(out));
}

SaliencyMap bilinear_resize(const SaliencyMap& map, std::size_t new_height,
                            std::size_t new_width) {
  if (new_height == 0 || new_width == 0) {
    throw InvalidArgument("resize target must be at least 1x1");
  }
  if (map.size() == 0) throw InvalidArgument("cannot resize an empty map");
  const auto src_coord = [](std::size_t dst, std::size_t in, std::size_t out) {
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    const double s = (static_cast<double>(dst) + 0.5) * scale - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(in - 1));
  };
  std::vector<double> out(new_height * new_width);
  for (std::size_t y = 0; y < new_height; ++y) {
    const double sy = src_coord(y, map.height(), new_height);
    const auto y0 = static_cast<std::size_t>(std::floor(sy));
    const std::size_t y1 = std::min(y0 + 1, map.height() - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < new_width; ++x) {
      const double sx = src_coord(x, map.width(), new_width);
      const auto x0 = static_cast<std::size_t>(std::floor(sx));
      const std::size_t x1 = std::min(x0 + 1, map.width() - 1);
      const double fx = sx - static_cast<double>(x0);
      // a + f * (b - a) keeps constant regions exactly constant.
      const double top = map.at(y0, x0) + fx * (map.at(y0, x1) - map.at(y0, x0));
      const double bottom = map.at(y1, x0) + fx * (map.at(y1, x1) - map.at(y1, x0));
      out[y * new_width + x] = top + fy * (bottom - top);
    }
  }
  return SaliencyMap(new_height, new_width, std::move(out));
}

}  // namespace rfxg
