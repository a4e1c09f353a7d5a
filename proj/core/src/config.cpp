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

#include "rfxg/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "rfxg/error.hpp"

namespace rfxg {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw InvalidArgument(fmt::format("bad value '{}' for {}", value, key));
  }
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  return parse_number<std::size_t>(key, value);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InvalidArgument(fmt::format("bad value '{}' for {}", value, key));
}

PerturbationSchedule parse_schedule(const std::string& value) {
  if (value == "standard") return PerturbationSchedule::standard();
  std::vector<double> alphas;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) alphas.push_back(parse_number<double>("schedule", trim(item)));
  return PerturbationSchedule(std::move(alphas));
}

}  // namespace

MaskFill ExperimentConfig::mask_fill() const {
  return MaskFill::parse(fill, fill_seed, blur_sigma, blur_radius);
}

MetricOptions ExperimentConfig::metric_options() const {
  return MetricOptions{schedule, mask_fill()};
}

ExplainerSettings ExperimentConfig::explainer_settings() const {
  ExplainerSettings s;
  s.ig_steps = ig_steps;
  s.occlusion.patch = occlusion_patch;
  s.occlusion.stride = occlusion_stride;
  return s;
}

void ExperimentConfig::validate() const {
  if (dataset == DatasetSource::kSynthetic) {
    taxonomy.validate();
  } else if (!std::filesystem::is_directory(dataset_dir)) {
    throw InvalidArgument(fmt::format("dataset directory {} does not exist", dataset_dir.string()));
  }
  if (dataset == DatasetSource::kDirectory && hierarchy.empty()) {
    throw InvalidArgument("an image directory needs a hierarchy file");
  }
  if (!hierarchy.empty() && !std::filesystem::is_regular_file(hierarchy)) {
    throw InvalidArgument(fmt::format("hierarchy file {} does not exist", hierarchy.string()));
  }
  if (model == ModelSource::kCheckpoint && !std::filesystem::is_regular_file(checkpoint)) {
    throw InvalidArgument(fmt::format("checkpoint {} does not exist", checkpoint.string()));
  }
  if (model == ModelSource::kRemote && remote_command.empty()) {
    throw InvalidArgument("model = remote needs a remote command");
  }
  if (model == ModelSource::kTrain && dataset != DatasetSource::kSynthetic) {
    throw InvalidArgument("training a fresh model needs the synthetic dataset");
  }
  if (min_group_size < 2) throw InvalidArgument("min_group_size must be at least 2");
  if (ig_steps < 8) throw InvalidArgument("ig_steps must be at least 8");
  if (occlusion_patch < 1 || occlusion_stride < 1) {
    throw InvalidArgument("occlusion patch and stride must be at least 1");
  }
  if (threads < 1) throw InvalidArgument("threads must be at least 1");
  if (output.empty()) throw InvalidArgument("output directory is empty");
  (void)mask_fill();
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                   bool repeat) {
  if (key == "dataset") {
    if (value == "synthetic") {
      cfg.dataset = DatasetSource::kSynthetic;
      cfg.dataset_dir.clear();
    } else {
      cfg.dataset = DatasetSource::kDirectory;
      cfg.dataset_dir = value;
    }
  } else if (key == "groups") {
    cfg.taxonomy.groups = parse_count(key, value);
  } else if (key == "classes_per_group") {
    cfg.taxonomy.classes_per_group = parse_count(key, value);
  } else if (key == "side") {
    cfg.taxonomy.side = parse_count(key, value);
  } else if (key == "eval_per_class") {
    cfg.eval_per_class = parse_count(key, value);
  } else if (key == "model") {
    if (value == "train") {
      cfg.model = ModelSource::kTrain;
    } else if (value == "remote") {
      cfg.model = ModelSource::kRemote;
    } else {
      cfg.model = ModelSource::kCheckpoint;
      cfg.checkpoint = value;
    }
  } else if (key == "remote") {
    cfg.remote_command = value;
  } else if (key == "train_per_class") {
    cfg.train_per_class = parse_count(key, value);
  } else if (key == "val_per_class") {
    cfg.val_per_class = parse_count(key, value);
  } else if (key == "epochs") {
    cfg.training.epochs = parse_count(key, value);
  } else if (key == "batch") {
    cfg.training.batch = parse_count(key, value);
  } else if (key == "lr") {
    cfg.training.learning_rate = parse_number<double>(key, value);
  } else if (key == "anneal") {
    cfg.training.anneal = parse_bool(key, value);
  } else if (key == "hierarchy") {
    cfg.hierarchy = value;
  } else if (key == "min_group_size") {
    cfg.min_group_size = parse_count(key, value);
  } else if (key == "explainer") {
    if (!repeat) cfg.explainers.clear();
    const auto kind = parse_explainer(value);
    if (kind == ExplainerKind::kRandom) return;
    if (std::find(cfg.explainers.begin(), cfg.explainers.end(), kind) == cfg.explainers.end()) {
      cfg.explainers.push_back(kind);
    }
  } else if (key == "metric") {
    if (!repeat) cfg.metrics.clear();
    const auto m = parse_metric(value);
    if (std::find(cfg.metrics.begin(), cfg.metrics.end(), m) == cfg.metrics.end()) {
      cfg.metrics.push_back(m);
    }
  } else if (key == "schedule") {
    cfg.schedule = parse_schedule(value);
  } else if (key == "fill") {
    (void)MaskFill::parse(value);
    cfg.fill = value;
  } else if (key == "fill_seed") {
    cfg.fill_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "blur_sigma") {
    cfg.blur_sigma = parse_number<double>(key, value);
  } else if (key == "blur_radius") {
    cfg.blur_radius = parse_number<int>(key, value);
  } else if (key == "ig_steps") {
    cfg.ig_steps = parse_count(key, value);
  } else if (key == "occlusion_patch") {
    cfg.occlusion_patch = parse_count(key, value);
  } else if (key == "occlusion_stride") {
    cfg.occlusion_stride = parse_count(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "output") {
    cfg.output = value;
  } else if (key == "overlays") {
    cfg.overlays = parse_count(key, value);
  } else if (key == "dump_curves") {
    cfg.dump_curves = parse_bool(key, value);
  } else if (key == "threads") {
    cfg.threads = parse_count(key, value);
  } else {
    throw InvalidArgument(fmt::format("unknown config key '{}'", key));
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  bool seen_explainer = false, seen_metric = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(fmt::format("config line {}: expected 'key = value'", lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw FormatError(fmt::format("config line {}: empty key or value", lineno));
    }
    bool repeat = false;
    if (key == "explainer") {
      repeat = seen_explainer;
      seen_explainer = true;
    } else if (key == "metric") {
      repeat = seen_metric;
      seen_metric = true;
    }
    try {
      apply_setting(cfg, key, value, repeat);
    } catch (const InvalidArgument& e) {
      throw FormatError(fmt::format("config line {}: {}", lineno, e.what()));
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument(fmt::format("cannot open config {}", path.string()));
  return parse_config(in);
}

std::string format_config(const ExperimentConfig& cfg, bool include_output) {
  std::string out;
  auto line = [&out](std::string_view key, const auto& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  line("dataset", cfg.dataset == DatasetSource::kSynthetic ? std::string("synthetic")
                                                           : cfg.dataset_dir.string());
  line("groups", cfg.taxonomy.groups);
  line("classes_per_group", cfg.taxonomy.classes_per_group);
  line("side", cfg.taxonomy.side);
  line("eval_per_class", cfg.eval_per_class);
  switch (cfg.model) {
    case ModelSource::kTrain:
      line("model", "train");
      break;
    case ModelSource::kCheckpoint:
      line("model", cfg.checkpoint.string());
      break;
    case ModelSource::kRemote:
      line("model", "remote");
      line("remote", cfg.remote_command);
      break;
  }
  line("train_per_class", cfg.train_per_class);
  line("val_per_class", cfg.val_per_class);
  line("epochs", cfg.training.epochs);
  line("batch", cfg.training.batch);
  line("lr", cfg.training.learning_rate);
  line("anneal", cfg.training.anneal ? "true" : "false");
  if (!cfg.hierarchy.empty()) line("hierarchy", cfg.hierarchy.string());
  line("min_group_size", cfg.min_group_size);
  for (auto e : cfg.explainers) line("explainer", to_string(e));
  for (auto m : cfg.metrics) line("metric", to_string(m));
  line("schedule", fmt::format("{}", fmt::join(cfg.schedule.alphas(), ",")));
  line("fill", cfg.fill);
  line("fill_seed", cfg.fill_seed);
  line("blur_sigma", cfg.blur_sigma);
  line("blur_radius", cfg.blur_radius);
  line("ig_steps", cfg.ig_steps);
  line("occlusion_patch", cfg.occlusion_patch);
  line("occlusion_stride", cfg.occlusion_stride);
  line("seed", cfg.seed);
  if (include_output) line("output", cfg.output.string());
  line("overlays", cfg.overlays);
  line("dump_curves", cfg.dump_curves ? "true" : "false");
  line("threads", cfg.threads);
  return out;
}

}  // namespace rfxg
