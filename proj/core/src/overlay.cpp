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

#include "rfxg/overlay.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "rfxg/error.hpp"

namespace rfxg {

void ramp_color(double t, double rgb[3]) {
  t = std::clamp(t, 0.0, 1.0);
  rgb[0] = t;
  rgb[1] = 0.0;
  rgb[2] = 1.0 - t;
}

ImageTensor render_overlay(const ImageTensor& image, const SaliencyMap& map) {
  if (map.height() != image.height() || map.width() != image.width()) {
    throw DimensionError(fmt::format("saliency {}x{} does not match image {}x{}", map.height(),
                                     map.width(), image.height(), image.width()));
  }
  if (image.channels() != 1 && image.channels() != 3) {
    throw DimensionError(fmt::format("overlay needs 1 or 3 channels, got {}", image.channels()));
  }
  const auto values = map.values();
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = values.empty() ? 0.0 : *lo_it;
  const double span = values.empty() ? 0.0 : *hi_it - lo;

  ImageTensor out(image.height(), image.width(), 3);
  for (std::size_t i = 0; i < image.height(); ++i) {
    for (std::size_t j = 0; j < image.width(); ++j) {
      const double t = span > 0.0 ? (map.at(i, j) - lo) / span : 0.5;
      double rgb[3];
      ramp_color(t, rgb);
      for (std::size_t c = 0; c < 3; ++c) {
        const double base = image.at(i, j, image.channels() == 1 ? 0 : c);
        out.set(i, j, c, std::clamp(0.5 * base + 0.5 * rgb[c], 0.0, 1.0));
      }
    }
  }
  return out;
}

}  // namespace rfxg
