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

#include "rfxg/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "rfxg/error.hpp"
#include "rfxg/image_io.hpp"
#include "rfxg/random.hpp"

namespace rfxg {
namespace {

struct Colour {
  const char* name;
  double r, g, b;
};

constexpr std::array<Colour, 8> kPalette{{
    {"red", 0.92, 0.16, 0.14},
    {"green", 0.16, 0.84, 0.22},
    {"blue", 0.18, 0.30, 0.95},
    {"yellow", 0.95, 0.88, 0.14},
    {"magenta", 0.88, 0.18, 0.90},
    {"cyan", 0.15, 0.88, 0.90},
    {"orange", 0.96, 0.55, 0.10},
    {"white", 0.95, 0.95, 0.95},
}};

constexpr std::array<ShapeFamily, 4> kFamilies{ShapeFamily::kRound, ShapeFamily::kPolygon,
                                               ShapeFamily::kStripe, ShapeFamily::kCross};

// (u, v) are shape-local coordinates scaled so the silhouette spans [-1, 1].
bool inside(ShapeFamily family, double u, double v) {
  switch (family) {
    case ShapeFamily::kRound: {
      const double r2 = u * u + v * v;
      return r2 <= 1.0 && r2 >= 0.2;
    }
    case ShapeFamily::kPolygon:
      // Equilateral triangle with circumradius 1.
      return v <= 0.5 && 0.866 * u - 0.5 * v <= 0.5 && -0.866 * u - 0.5 * v <= 0.5;
    case ShapeFamily::kStripe: {
      if (std::abs(u) > 1.0 || std::abs(v) > 0.9) return false;
      const double phase = (u + 1.0) * 2.0;
      return phase - std::floor(phase) < 0.5;
    }
    case ShapeFamily::kCross:
      return (std::abs(u) <= 0.3 && std::abs(v) <= 1.0) ||
             (std::abs(v) <= 0.3 && std::abs(u) <= 1.0);
  }
  return false;
}

}  // namespace

std::string to_string(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::kRound:
      return "round";
    case ShapeFamily::kPolygon:
      return "polygon";
    case ShapeFamily::kStripe:
      return "stripe";
    case ShapeFamily::kCross:
      return "cross";
  }
  return "unknown";
}

void SyntheticTaxonomy::validate() const {
  if (groups < 2 || groups > kFamilies.size()) {
    throw InvalidArgument(fmt::format("taxonomy needs 2..{} groups, got {}", kFamilies.size(),
                                      groups));
  }
  if (classes_per_group < 5 || classes_per_group > kPalette.size()) {
    throw InvalidArgument(fmt::format("taxonomy needs 5..{} classes per group, got {}",
                                      kPalette.size(), classes_per_group));
  }
  if (side < 16) throw InvalidArgument(fmt::format("image side {} too small to render", side));
}

ShapeFamily SyntheticTaxonomy::family(std::size_t class_index) const {
  return kFamilies.at(class_index / classes_per_group);
}

std::string SyntheticTaxonomy::group_name(std::size_t class_index) const {
  return to_string(family(class_index));
}

std::string SyntheticTaxonomy::class_name(std::size_t class_index) const {
  return group_name(class_index) + "_" + kPalette.at(class_index % classes_per_group).name;
}

std::string SyntheticTaxonomy::hierarchy_text() const {
  std::ostringstream out;
  out << "# synthetic shape taxonomy: " << groups << " groups x " << classes_per_group
      << " classes\n";
  for (std::size_t g = 0; g < groups; ++g) {
    out << "shape\t" << to_string(kFamilies[g]) << '\n';
  }
  for (std::size_t c = 0; c < class_count(); ++c) {
    out << group_name(c) << '\t' << class_name(c) << '\n';
  }
  for (std::size_t c = 0; c < class_count(); ++c) {
    out << "leaf\t" << class_name(c) << '\t' << c << '\n';
  }
  return out.str();
}

ImageTensor render_sample(const SyntheticTaxonomy& tax, std::size_t class_index,
                          std::uint64_t sample_seed) {
  tax.validate();
  if (class_index >= tax.class_count()) {
    throw InvalidArgument(fmt::format("class {} outside taxonomy", class_index));
  }
  Rng rng(sample_seed);
  const std::size_t side = tax.side;
  const double s = static_cast<double>(side);
  const std::size_t variant = class_index % tax.classes_per_group;
  const Colour& colour = kPalette[variant];
  const ShapeFamily family = tax.family(class_index);

  const double size_factor = 0.88 + 0.06 * static_cast<double>(variant % 5);
  const double radius = s * rng.uniform(0.25, 0.33) * size_factor;
  const double cx = s / 2.0 + rng.uniform(-s / 8.0, s / 8.0);
  const double cy = s / 2.0 + rng.uniform(-s / 8.0, s / 8.0);
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double brightness = rng.uniform(0.85, 1.0);
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);

  std::vector<double> data(side * side * 3);
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      const double dx = (static_cast<double>(x) + 0.5 - cx) / radius;
      const double dy = (static_cast<double>(y) + 0.5 - cy) / radius;
      const double u = cos_t * dx + sin_t * dy;
      const double v = -sin_t * dx + cos_t * dy;
      const bool on_shape = inside(family, u, v);
      const std::array<double, 3> rgb{colour.r, colour.g, colour.b};
      for (std::size_t c = 0; c < 3; ++c) {
        const double noise = rng.uniform(-0.08, 0.08);
        const double base = on_shape ? rgb[c] * brightness : 0.18;
        data[(y * side + x) * 3 + c] = std::clamp(base + noise, 0.0, 1.0);
      }
    }
  }
  return ImageTensor(side, side, 3, std::move(data));
}

std::vector<LabeledImage> generate_dataset(const SyntheticTaxonomy& tax,
                                           std::size_t n_per_class, std::uint64_t seed) {
  tax.validate();
  if (n_per_class < 1) throw InvalidArgument("n_per_class must be at least 1");
  std::vector<LabeledImage> out;
  out.reserve(tax.class_count() * n_per_class);
  for (std::size_t c = 0; c < tax.class_count(); ++c) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const std::uint64_t sample_seed = mix_seed(seed, c * n_per_class + i);
      out.push_back({render_sample(tax, c, sample_seed), c});
    }
  }
  return out;
}

void export_dataset(const std::filesystem::path& dir, const std::vector<LabeledImage>& data) {
  std::filesystem::create_directories(dir);
  std::ofstream labels(dir / "labels.tsv");
  if (!labels) throw FormatError(fmt::format("cannot write {}", (dir / "labels.tsv").string()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::string file = fmt::format("img_{:05d}.ppm", i);
    save_pnm(dir / file, data[i].image);
    labels << file << '\t' << data[i].label << '\n';
  }
}

std::vector<LabeledImage> import_dataset(const std::filesystem::path& dir) {
  std::ifstream labels(dir / "labels.tsv");
  if (!labels) throw FormatError(fmt::format("cannot read {}", (dir / "labels.tsv").string()));
  std::vector<LabeledImage> out;
  std::string line;
  while (std::getline(labels, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(fmt::format("bad labels.tsv line '{}'", line));
    std::size_t label = 0;
    try {
      label = std::stoul(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw FormatError(fmt::format("bad label in '{}'", line));
    }
    out.push_back({load_pnm(dir / line.substr(0, tab)), label});
  }
  return out;
}

}  // namespace rfxg
