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
#include <filesystem>
#include <string>
#include <vector>

#include "rfxg/image.hpp"

namespace rfxg {

// Shape families used as superordinate groups. Classes inside a family share
// the silhouette and differ by colour and size.
enum class ShapeFamily { kRound, kPolygon, kStripe, kCross };

std::string to_string(ShapeFamily family);

struct SyntheticTaxonomy {
  std::size_t groups = 4;
  std::size_t classes_per_group = 5;
  std::size_t side = 32;
  std::uint64_t seed = 0;

  std::size_t class_count() const { return groups * classes_per_group; }
  ShapeFamily family(std::size_t class_index) const;
  // Family name of the class's group, e.g. "round".
  std::string group_name(std::size_t class_index) const;
  // e.g. "round_red"
  std::string class_name(std::size_t class_index) const;

  // Hierarchy text: a "shape" root, one node per group, classes below.
  std::string hierarchy_text() const;

  // Throws InvalidArgument unless groups in [2, 4], classes_per_group in
  // [5, 8] and side >= 16.
  void validate() const;
};

struct LabeledImage {
  ImageTensor image;
  std::size_t label = 0;
};

// n_per_class images per class, ordered class by class, fully determined by
// (taxonomy, n_per_class, seed).
std::vector<LabeledImage> generate_dataset(const SyntheticTaxonomy& taxonomy,
                                           std::size_t n_per_class, std::uint64_t seed);

// Renders one sample of a class; `sample_seed` fixes the jitter and noise.
ImageTensor render_sample(const SyntheticTaxonomy& taxonomy, std::size_t class_index,
                          std::uint64_t sample_seed);

// Writes img_00000.ppm ... plus labels.tsv ("file<TAB>label") to dir.
void export_dataset(const std::filesystem::path& dir, const std::vector<LabeledImage>& data);
// Reads a directory written by export_dataset (or any directory holding a
// labels.tsv next to P5/P6 files).
std::vector<LabeledImage> import_dataset(const std::filesystem::path& dir);

}  // namespace rfxg
