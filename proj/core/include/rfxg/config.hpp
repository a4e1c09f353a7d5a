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
#include <string>
#include <vector>

#include "rfxg/convnet.hpp"
#include "rfxg/explainers.hpp"
#include "rfxg/image.hpp"
#include "rfxg/metrics.hpp"
#include "rfxg/synthetic.hpp"

namespace rfxg {

enum class DatasetSource { kSynthetic, kDirectory };
enum class ModelSource { kTrain, kCheckpoint, kRemote };

// Everything a run needs. The file format is one `key = value` per line;
// '#' starts a comment, blank lines are ignored, and `explainer` / `metric`
// may repeat (the first occurrence replaces the default list).
//
//   dataset          synthetic | <directory written by gen-data>
//   groups, classes_per_group, side      synthetic taxonomy shape
//   eval_per_class   evaluation images per class
//   model            train | <checkpoint path> | remote
//   remote           bridge command (model = remote)
//   train_per_class, val_per_class, epochs, batch, lr, anneal (true|false)
//   hierarchy        hierarchy file; synthetic data defaults to its own taxonomy
//   min_group_size
//   explainer        gradient | ig | gradcam | occlusion   (random always runs)
//   metric           CCS | CGC | PGS | CGS | Deletion
//   schedule         standard | comma-separated fractions
//   fill             black | mean | noise | blur
//   fill_seed, blur_sigma, blur_radius
//   ig_steps, occlusion_patch, occlusion_stride
//   seed, output, overlays, dump_curves (true|false), threads
struct ExperimentConfig {
  DatasetSource dataset = DatasetSource::kSynthetic;
  std::filesystem::path dataset_dir;
  SyntheticTaxonomy taxonomy;
  std::size_t eval_per_class = 10;

  ModelSource model = ModelSource::kTrain;
  std::filesystem::path checkpoint;
  std::string remote_command;
  std::size_t train_per_class = 100;
  std::size_t val_per_class = 20;
  TrainingOptions training;

  std::filesystem::path hierarchy;
  std::size_t min_group_size = 5;

  std::vector<ExplainerKind> explainers = {ExplainerKind::kGradient,
                                           ExplainerKind::kIntegratedGradients,
                                           ExplainerKind::kGradCam, ExplainerKind::kOcclusion};
  std::vector<Metric> metrics = {Metric::kCcs, Metric::kCgc, Metric::kPgs, Metric::kCgs,
                                 Metric::kDeletion};
  PerturbationSchedule schedule = PerturbationSchedule::standard();
  std::string fill = "black";
  std::uint64_t fill_seed = 0;
  double blur_sigma = 2.0;
  int blur_radius = 4;
  std::size_t ig_steps = 64;
  std::size_t occlusion_patch = 4;
  std::size_t occlusion_stride = 2;

  std::uint64_t seed = 7;
  std::filesystem::path output = "rfxg-report";
  std::size_t overlays = 4;
  bool dump_curves = false;
  std::size_t threads = 1;

  MaskFill mask_fill() const;
  MetricOptions metric_options() const;
  ExplainerSettings explainer_settings() const;

  // Throws InvalidArgument when a referenced file is missing or a value is
  // out of range.
  void validate() const;
};

// Applies one setting. Throws InvalidArgument on an unknown key or a bad
// value. `repeat` marks a repeated list key that appends instead of
// replacing the defaults.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                   bool repeat = false);

// Throws FormatError (with the line number) on malformed lines.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical text accepted by parse_config. The output line is left out
// unless include_output is set.
std::string format_config(const ExperimentConfig& cfg, bool include_output = true);

}  // namespace rfxg
