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
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rfxg {

// Height x width x channels image with values in [0, 1], stored row-major
// as (row, column, channel).
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
              double fill = 0.0);
  // Throws DimensionError on a length mismatch and InvalidArgument when a
  // value falls outside [0, 1] or is not finite.
  ImageTensor(std::size_t height, std::size_t width, std::size_t channels,
              std::vector<double> data);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  std::size_t pixel_count() const { return height_ * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(std::size_t row, std::size_t col, std::size_t ch) const {
    return (row * width_ + col) * channels_ + ch;
  }
  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data_[index(row, col, ch)];
  }
  // Value must lie in [0, 1].
  void set(std::size_t row, std::size_t col, std::size_t ch, double value);

  std::span<const double> data() const { return data_; }

  bool same_shape(const ImageTensor& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

// Per-pixel relevance scores of any sign. All values are finite.
class SaliencyMap {
 public:
  SaliencyMap() = default;
  SaliencyMap(std::size_t height, std::size_t width, double fill = 0.0);
  SaliencyMap(std::size_t height, std::size_t width, std::vector<double> values);

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return values_.size(); }

  double at(std::size_t row, std::size_t col) const {
    return values_[row * width_ + col];
  }
  void set(std::size_t row, std::size_t col, double value);

  std::span<const double> values() const { return values_; }

  friend bool operator==(const SaliencyMap&, const SaliencyMap&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

// Binary top-alpha selection over pixels; true marks a pixel to suppress.
struct PerturbationMask {
  std::size_t height = 0;
  std::size_t width = 0;
  double alpha = 0.0;
  std::vector<std::uint8_t> bits;

  std::size_t count() const;
  bool test(std::size_t row, std::size_t col) const {
    return bits[row * width + col] != 0;
  }
};

// Ordered list of perturbation fractions, strictly increasing inside (0, 1).
class PerturbationSchedule {
 public:
  explicit PerturbationSchedule(std::vector<double> alphas);
  // 0.1, 0.2, ..., 0.9
  static PerturbationSchedule standard();

  const std::vector<double>& alphas() const { return alphas_; }
  std::size_t size() const { return alphas_.size(); }

 private:
  std::vector<double> alphas_;
};

// How suppressed pixels are filled.
struct MaskFill {
  struct Black {};
  struct MeanColor {};
  struct UniformNoise {
    std::uint64_t seed = 0;
  };
  struct GaussianBlur {
    double sigma = 2.0;
    int radius = 4;
  };
  using Variant = std::variant<Black, MeanColor, UniformNoise, GaussianBlur>;

  Variant variant = Black{};

  static MaskFill black() { return {Black{}}; }
  static MaskFill mean_color() { return {MeanColor{}}; }
  static MaskFill uniform_noise(std::uint64_t seed) { return {UniformNoise{seed}}; }
  static MaskFill gaussian_blur(double sigma, int radius);

  // Short identifier: "black", "mean", "noise", "blur".
  std::string name() const;
  // Parses the identifiers produced by name(); blur and noise take their
  // parameters from the extra arguments.
  static MaskFill parse(const std::string& name, std::uint64_t seed = 0,
                        double sigma = 2.0, int radius = 4);
};

// Metric integrand sampled along a perturbation schedule.
struct PerturbationCurve {
  std::vector<double> alphas;
  std::vector<double> scores;
};

}  // namespace rfxg
