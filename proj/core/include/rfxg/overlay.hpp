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

#include "rfxg/image.hpp"

namespace rfxg {

// Colour of a normalized saliency value on the blue-to-red ramp: (t, 0, 1 - t).
void ramp_color(double t, double rgb[3]);

// Min-max normalizes the map (a constant map becomes all 0.5), colours it
// with ramp_color and blends it at 0.5 over the image. Single-channel
// images are replicated to grey first. Always returns a 3-channel image of
// the input size; write it with write_pnm for a P6 file.
ImageTensor render_overlay(const ImageTensor& image, const SaliencyMap& map);

}  // namespace rfxg
