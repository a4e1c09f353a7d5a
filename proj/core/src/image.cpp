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

#include "rfxg/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "rfxg/error.hpp"

namespace rfxg {
namespace {

void check_unit_value(double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InvalidArgument(fmt::format("image value {} outside [0, 1]", v));
  }
}

}  // namespace

ImageTensor::ImageTensor(std::size_t height, std::size_t width,
                         std::size_t channels, double fill)
    : height_(height),
      width_(width),
      channels_(channels),
      data_(height * width * channels, fill) {
  check_unit_value(fill);
}

ImageTensor::ImageTensor(std::size_t height, std::size_t width,
                         std::size_t channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (data_.size() != height * width * channels) {
    throw DimensionError(fmt::format("image data has {} values, expected {}x{}x{}",
                                     data_.size(), height, width, channels));
  }
  for (double v : data_) check_unit_value(v);
}

void ImageTensor::set(std::size_t row, std::size_t col, std::size_t ch,
                      double value) {
  check_unit_value(value);
  data_[index(row, col, ch)] = value;
}

SaliencyMap::SaliencyMap(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), values_(height * width, fill) {
  if (!std::isfinite(fill)) throw InvalidArgument("saliency fill is not finite");
}

SaliencyMap::SaliencyMap(std::size_t height, std::size_t width,
                         std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (values_.size() != height * width) {
    throw DimensionError(fmt::format("saliency map has {} values, expected {}x{}",
                                     values_.size(), height, width));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidArgument(
          fmt::format("saliency value at linear index {} is not finite", i));
    }
  }
}

void SaliencyMap::set(std::size_t row, std::size_t col, double value) {
  if (!std::isfinite(value)) throw InvalidArgument("saliency value is not finite");
  values_[row * width_ + col] = value;
}

std::size_t PerturbationMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
}

PerturbationSchedule::PerturbationSchedule(std::vector<double> alphas)
    : alphas_(std::move(alphas)) {
  for (std::size_t i = 0; i < alphas_.size(); ++i) {
    const double a = alphas_[i];
    if (!(a > 0.0 && a < 1.0)) {
      throw InvalidArgument(fmt::format("schedule entry {} not in (0, 1)", a));
    }
    if (i > 0 && !(a > alphas_[i - 1])) {
      throw InvalidArgument("schedule must be strictly increasing");
    }
  }
}

PerturbationSchedule PerturbationSchedule::standard() {
  std::vector<double> alphas;
  for (int i = 1; i <= 9; ++i) alphas.push_back(i / 10.0);
  return PerturbationSchedule(std::move(alphas));
}

MaskFill MaskFill::gaussian_blur(double sigma, int radius) {
  if (!(sigma > 0.0)) throw InvalidArgument("blur sigma must be positive");
  if (radius < 1) throw InvalidArgument("blur radius must be at least 1");
  return {GaussianBlur{sigma, radius}};
}

std::string MaskFill::name() const {
  struct Namer {
    std::string operator()(const Black&) const { return "black"; }
    std::string operator()(const MeanColor&) const { return "mean"; }
    std::string operator()(const UniformNoise&) const { return "noise"; }
    std::string operator()(const GaussianBlur&) const { return "blur"; }
  };
  return std::visit(Namer{}, variant);
}

MaskFill MaskFill::parse(const std::string& name, std::uint64_t seed,
                         double sigma, int radius) {
  if (name == "black") return black();
  if (name == "mean") return mean_color();
  if (name == "noise") return uniform_noise(seed);
  if (name == "blur") return gaussian_blur(sigma, radius);
  throw InvalidArgument(fmt::format("unknown mask fill '{}'", name));
}

}  // namespace rfxg
