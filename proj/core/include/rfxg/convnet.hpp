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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfxg/image.hpp"
#include "rfxg/scorer.hpp"
#include "rfxg/synthetic.hpp"

namespace rfxg {

// One convolution stage: same-padded k x k convolution, rectifier, and an
// optional 2x2 average pool.
struct ConvStage {
  std::size_t out_channels = 8;
  std::size_t kernel = 3;
  bool pool = true;

  friend bool operator==(const ConvStage&, const ConvStage&) = default;
};

struct Architecture {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t channels = 3;
  std::size_t classes = 20;
  std::vector<ConvStage> stages;

  // Two stages (8 then 16 kernels of 3x3, each pooled) and a dense head.
  static Architecture standard(std::size_t side, std::size_t classes);

  // e.g. "input 32 32 3 classes 20 conv 8 3 pool conv 16 3 pool"
  std::string descriptor() const;
  static Architecture parse(const std::string& descriptor);

  // Throws InvalidArgument on an inconsistent architecture (even kernels,
  // pooling an odd extent, ...).
  void validate() const;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

// Channel-major (channel, row, column) feature maps.
struct FeatureMaps {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double at(std::size_t k, std::size_t i, std::size_t j) const {
    return values[(k * height + i) * width + j];
  }
  std::size_t size() const { return values.size(); }
};

struct ForwardRecord {
  std::vector<double> logits;
  std::vector<double> probs;
  // Rectified output of the last convolution stage, before pooling. Empty
  // for a network without convolution stages.
  FeatureMaps activations;
};

// Parameters in declaration order: per stage kernel (out x in x k x k) then
// bias, then the dense weight (classes x flattened) and bias.
struct NetParameters {
  struct Conv {
    std::vector<double> kernel;
    std::vector<double> bias;
    friend bool operator==(const Conv&, const Conv&) = default;
  };
  std::vector<Conv> conv;
  std::vector<double> dense_weight;
  std::vector<double> dense_bias;

  std::size_t count() const;
  // Visits every tensor in declaration order.
  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    for (auto& c : conv) {
      fn(c.kernel);
      fn(c.bias);
    }
    fn(dense_weight);
    fn(dense_bias);
  }
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const {
    for (const auto& c : conv) {
      fn(c.kernel);
      fn(c.bias);
    }
    fn(dense_weight);
    fn(dense_bias);
  }

  friend bool operator==(const NetParameters&, const NetParameters&) = default;
};

// Small convolutional classifier with hand-written forward and backward
// passes. Forward and backward are const and safe to call concurrently.
class ToyConvNet : public GradientScorer {
 public:
  // All parameters zero.
  explicit ToyConvNet(Architecture arch);
  // Uniform initialisation in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static ToyConvNet initialized(Architecture arch, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }
  const NetParameters& parameters() const { return params_; }
  NetParameters& mutable_parameters() { return params_; }
  bool has_target_layer() const { return !arch_.stages.empty(); }

  ForwardRecord forward(const ImageTensor& image) const;
  // Runs the layers after the target layer on supplied activations.
  ForwardRecord head_forward(const FeatureMaps& activations) const;

  // d/dx of sum_c weights[c] * f_c, image layout. A zero weight vector is
  // allowed and gives a zero gradient.
  std::vector<double> backward_input(const ImageTensor& image, std::span<const double> weights,
                                     ScoreSpace space) const;
  // d/dA^k of the same objective, shaped like forward().activations.
  FeatureMaps backward_activations(const ImageTensor& image, std::span<const double> weights,
                                   ScoreSpace space) const;

  // Cross-entropy loss and its parameter gradient for one example,
  // accumulated into `grad` (which must match parameters()).
  double accumulate_loss_gradient(const ImageTensor& image, std::size_t label,
                                  NetParameters& grad) const;

  // Scorer interface.
  std::size_t class_count() const override { return arch_.classes; }
  std::vector<double> probabilities(const ImageTensor& image) const override;
  std::optional<std::vector<double>> logits(const ImageTensor& image) const override;
  std::vector<double> objective_gradient(const ImageTensor& image, std::span<const double> weights,
                                         ScoreSpace space) const override;

  NetParameters zero_like() const;

 private:
  struct Tape;
  Tape run(const ImageTensor& image) const;
  // Backpropagates dlogits; fills the optional outputs.
  void backprop(const Tape& tape, std::span<const double> dlogits, NetParameters* grad,
                std::vector<double>* dinput, FeatureMaps* dtarget) const;
  std::vector<double> objective_dlogits(std::span<const double> probs,
                                        std::span<const double> weights, ScoreSpace space) const;
  void check_image(const ImageTensor& image) const;

  Architecture arch_;
  NetParameters params_;
};

struct TrainingOptions {
  std::size_t epochs = 30;
  std::size_t batch = 16;
  double learning_rate = 0.1;
  // Cosine annealing: epoch e uses learning_rate * (1 + cos(pi e / epochs)) / 2.
  bool anneal = true;
  std::uint64_t seed = 0;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  // Absent when no validation set was supplied.
  std::optional<double> validation_accuracy;
};

// Plain minibatch SGD (no momentum) on cross-entropy with seeded shuffling. Throws
// TrainingDivergence when the loss becomes non-finite.
std::vector<EpochStats> train(ToyConvNet& model, const std::vector<LabeledImage>& train_set,
                              const std::vector<LabeledImage>& validation_set,
                              const TrainingOptions& options);

double accuracy(const ToyConvNet& model, const std::vector<LabeledImage>& data);

// Checkpoint: "RFXG-NET 1\n", the architecture descriptor line, then every
// parameter tensor as little-endian float32 in declaration order.
void write_checkpoint(std::ostream& out, const ToyConvNet& model);
ToyConvNet read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const ToyConvNet& model);
ToyConvNet load_checkpoint(const std::filesystem::path& path);

}  // namespace rfxg
