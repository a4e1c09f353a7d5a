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

#include <filesystem>
#include <iosfwd>
#include <string>

#include "rfxg/image.hpp"

namespace rfxg {

// Saliency map file: "RFXG-SAL 1\n<height> <width>\n" followed by
// height*width little-endian float32 values, row-major.
void write_saliency(std::ostream& out, const SaliencyMap& map);
SaliencyMap read_saliency(std::istream& in);
void save_saliency(const std::filesystem::path& path, const SaliencyMap& map);
SaliencyMap load_saliency(const std::filesystem::path& path);

// Binary PNM: P6 for 3-channel images, P5 for 1-channel images, maxval 255.
// Values are quantized as round(v * 255) and read back as q / 255.
void write_pnm(std::ostream& out, const ImageTensor& image);
ImageTensor read_pnm(std::istream& in);
void save_pnm(const std::filesystem::path& path, const ImageTensor& image);
ImageTensor load_pnm(const std::filesystem::path& path);

// Rounds every value to the nearest multiple of 1/255, matching what a PNM
// round trip would produce.
ImageTensor quantize_8bit(const ImageTensor& image);

}  // namespace rfxg
