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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rfxg/config.hpp"
#include "rfxg/convnet.hpp"
#include "rfxg/error.hpp"
#include "rfxg/experiment.hpp"
#include "rfxg/explainers.hpp"
#include "rfxg/image_io.hpp"
#include "rfxg/metrics.hpp"
#include "rfxg/ontology.hpp"
#include "rfxg/overlay.hpp"
#include "rfxg/random.hpp"
#include "rfxg/remote_scorer.hpp"
#include "rfxg/report.hpp"
#include "rfxg/synthetic.hpp"

namespace {

using namespace rfxg;

// Config keys that eval exposes as --flags (underscores become dashes).
const std::vector<std::string> kConfigKeys = {
    "dataset",         "groups",       "classes_per_group", "side",          "eval_per_class",
    "model",           "train_per_class", "val_per_class",  "epochs",        "batch",
    "lr",              "anneal",       "hierarchy",    "min_group_size",    "schedule",      "fill",
    "fill_seed",       "blur_sigma",   "blur_radius",       "ig_steps",      "occlusion_patch",
    "occlusion_stride", "seed",        "output",            "overlays",      "dump_curves",
    "threads"};

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

std::shared_ptr<const Scorer> open_scorer(const std::string& model, const std::string& remote) {
  if (!remote.empty()) return std::shared_ptr<const Scorer>(RemoteScorer::launch(remote));
  if (model.empty()) throw InvalidArgument("give --model or --remote");
  return std::make_shared<ToyConvNet>(load_checkpoint(model));
}

int run_gen_data(const SyntheticTaxonomy& tax, std::size_t per_class, std::uint64_t seed,
                 const std::string& out) {
  tax.validate();
  const auto data = generate_dataset(tax, per_class, seed);
  export_dataset(out, data);
  std::ofstream(std::filesystem::path(out) / "hierarchy.txt") << tax.hierarchy_text();
  fmt::print("wrote {} images of {} classes to {}\n", data.size(), tax.class_count(), out);
  return 0;
}

int run_train(const SyntheticTaxonomy& tax, std::size_t train_per_class, std::size_t val_per_class,
              TrainingOptions opts, std::uint64_t seed, const std::string& out) {
  tax.validate();
  const auto train_set = generate_dataset(tax, train_per_class, mix_seed(seed, 0));
  const auto val_set = generate_dataset(tax, val_per_class, mix_seed(seed, 1));
  auto net = ToyConvNet::initialized(Architecture::standard(tax.side, tax.class_count()),
                                     mix_seed(seed, 3));
  opts.seed = mix_seed(seed, 4);
  for (const auto& e : train(net, train_set, val_set, opts)) {
    fmt::print("epoch {:2d}  loss {:.4f}  train {:.3f}  val {:.3f}\n", e.epoch, e.mean_loss,
               e.train_accuracy, e.validation_accuracy.value_or(0.0));
  }
  save_checkpoint(out, net);
  fmt::print("saved {}\n", out);
  return 0;
}

int run_groups(const std::string& hierarchy_path, const SyntheticTaxonomy& tax, std::size_t min_size) {
  Hierarchy h;
  if (hierarchy_path.empty()) {
    h = parse_hierarchy(tax.hierarchy_text());
  } else {
    std::ifstream in(hierarchy_path);
    if (!in) throw InvalidArgument(fmt::format("cannot open {}", hierarchy_path));
    h = parse_hierarchy(in);
  }
  write_group_table(std::cout, build_groups(h, min_size));
  return 0;
}

int run_explain(const std::string& model, const std::string& remote, const std::string& image_path,
                const std::string& explainer, const std::string& query_text,
                const ExplainerSettings& settings, std::uint64_t seed, const std::string& out,
                const std::string& overlay) {
  const auto scorer = open_scorer(model, remote);
  const ImageTensor image = load_pnm(image_path);
  const Query query = parse_query(query_text);
  validate_query(query, scorer->class_count());
  const ExplainerKind kind = parse_explainer(explainer);
  const SaliencyMap map = explain(kind, *scorer, image, query, settings, seed);
  save_saliency(out, map);
  std::ofstream side(out + ".txt");
  side << "query\t" << format_query(query) << "\n"
       << "explainer\t" << to_string(kind) << "\n"
       << "image\t" << image_path << "\n"
       << "ig_steps\t" << settings.ig_steps << "\n"
       << "occlusion_patch\t" << settings.occlusion.patch << "\n"
       << "occlusion_stride\t" << settings.occlusion.stride << "\n"
       << "seed\t" << seed << "\n";
  if (!overlay.empty()) save_pnm(overlay, render_overlay(image, map));
  fmt::print("wrote {}\n", out);
  return 0;
}

int run_eval(const std::string& config_path, const std::map<std::string, std::string>& overrides,
             const std::vector<std::string>& explainers, const std::vector<std::string>& metrics,
             const std::string& remote, bool quiet) {
  ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
  if (const char* env = std::getenv("RFXG_SEED"); env != nullptr && *env != '\0') {
    apply_setting(cfg, "seed", env);
  }
  for (const auto& [key, value] : overrides) apply_setting(cfg, key, value);
  for (std::size_t i = 0; i < explainers.size(); ++i) apply_setting(cfg, "explainer", explainers[i], i > 0);
  for (std::size_t i = 0; i < metrics.size(); ++i) apply_setting(cfg, "metric", metrics[i], i > 0);
  if (!remote.empty()) {
    cfg.model = ModelSource::kRemote;
    cfg.remote_command = remote;
  }
  ProgressFn progress;
  if (!quiet) {
    progress = [](std::size_t done, std::size_t total) {
      if (done % 10 == 0 || done == total) fmt::print(stderr, "\r{}/{} images", done, total);
      if (done == total) fmt::print(stderr, "\n");
    };
  }
  const ReportBundle bundle = run_experiment(cfg, progress);
  fmt::print("{} images: {} processed, {} skipped, {} failed; report in {}\n", bundle.images.size(),
             bundle.processed, bundle.skipped, bundle.failed, cfg.output.string());
  return bundle.exit_code();
}

int run_selftest() {
  int failures = 0;
  const auto check = [&](bool ok, const std::string& what) {
    fmt::print("{} {}\n", ok ? "ok  " : "FAIL", what);
    if (!ok) ++failures;
  };

  SyntheticTaxonomy tax;
  tax.side = 16;
  const auto net = ToyConvNet::initialized(Architecture::standard(tax.side, tax.class_count()), 11);
  const ImageTensor image = render_sample(tax, 3, 5);
  const auto w = ObjectiveVector::single(tax.class_count(), 3);
  const auto grad = net.objective_gradient(image, w.weights(), ScoreSpace::kLogits);
  double worst = 0.0;
  std::size_t checked = 0;
  Rng rng(1);
  const auto f = [&](const std::vector<double>& x) {
    return net.objective(ImageTensor(16, 16, 3, x), w.weights(), ScoreSpace::kLogits);
  };
  const std::vector<double> x0(image.data().begin(), image.data().end());
  const double f0 = f(x0);
  for (int k = 0; k < 200 && checked < 20; ++k) {
    const std::size_t j = rng.below(image.size());
    const double h = 1e-3;
    if (x0[j] < h || x0[j] > 1.0 - h) continue;
    std::vector<double> up = x0, down = x0;
    up[j] += h;
    down[j] -= h;
    const double right = (f(up) - f0) / h, left = (f0 - f(down)) / h;
    // A rectifier switched between x - h and x + h.
    if (std::abs(right - left) > 1e-6 * std::max(1.0, std::abs(right))) continue;
    const double fd = (right + left) / 2.0;
    worst = std::max(worst, std::abs(fd - grad[j]) / std::max(1e-6, std::abs(fd)));
    ++checked;
  }
  check(checked == 20 && worst < 1e-3,
        fmt::format("input gradient matches finite differences on {} coordinates (worst {:.2e})", checked, worst));

  const GroupTable groups = build_groups(parse_hierarchy(tax.hierarchy_text()), 5);
  check(groups.groups().size() == tax.groups, fmt::format("{} groups from the synthetic taxonomy",
                                                          groups.groups().size()));

  std::vector<std::size_t> all(tax.class_count());
  for (std::size_t c = 0; c < all.size(); ++c) all[c] = c;
  const auto map = explain_random(16, 16, 3);
  const double full = pgs(net, image, map, all).score;
  check(std::abs(full) < 1e-9, fmt::format("PGS over every class is zero ({:.1e})", full));

  const auto saliency = explain_gradient(net, image, w);
  check(saliency.height() == 16 && saliency.width() == 16, "gradient map has the image size");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rfxg: saliency-map evaluation with class and group queries"};
  app.require_subcommand(1);

  SyntheticTaxonomy tax;
  const auto add_taxonomy = [&tax](CLI::App* cmd) {
    cmd->add_option("--groups", tax.groups, "Shape families")->capture_default_str();
    cmd->add_option("--classes-per-group", tax.classes_per_group, "Classes per family")->capture_default_str();
    cmd->add_option("--side", tax.side, "Image side in pixels")->capture_default_str();
  };

  std::uint64_t seed = 7;
  std::string out;

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic image set with labels and hierarchy");
  std::size_t per_class = 10;
  add_taxonomy(gen);
  gen->add_option("--per-class", per_class, "Images per class")->capture_default_str();
  gen->add_option("--seed", seed, "Generation seed")->capture_default_str();
  gen->add_option("--out", out, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train the toy classifier on synthetic data");
  std::size_t train_per_class = 100, val_per_class = 20;
  TrainingOptions topts;
  add_taxonomy(tr);
  tr->add_option("--train-per-class", train_per_class)->capture_default_str();
  tr->add_option("--val-per-class", val_per_class)->capture_default_str();
  tr->add_option("--epochs", topts.epochs)->capture_default_str();
  tr->add_option("--batch", topts.batch)->capture_default_str();
  tr->add_option("--lr", topts.learning_rate)->capture_default_str();
  tr->add_option("--anneal", topts.anneal, "Cosine learning-rate annealing")->capture_default_str();
  tr->add_option("--seed", seed, "Base seed")->capture_default_str();
  tr->add_option("--out", out, "Checkpoint path")->required();

  auto* grp = app.add_subcommand("groups", "Print the semantic group table of a hierarchy");
  std::string hierarchy;
  std::size_t min_group_size = 5;
  add_taxonomy(grp);
  grp->add_option("--hierarchy", hierarchy, "Hierarchy file (default: synthetic taxonomy)");
  grp->add_option("--min-group-size", min_group_size)->capture_default_str();

  auto* exp = app.add_subcommand("explain", "Explain one query on one image");
  std::string model, remote, image, explainer = "gradient", query, overlay;
  ExplainerSettings settings;
  exp->add_option("--model", model, "Checkpoint path");
  exp->add_option("--remote", remote, "Scorer bridge command");
  exp->add_option("--image", image, "PPM/PGM image")->required();
  exp->add_option("--explainer", explainer, "gradient|ig|gradcam|occlusion|random")->capture_default_str();
  exp->add_option("--query", query, "e.g. contrastive-class:3/5 or pointwise-group:0+1+2")->required();
  exp->add_option("--ig-steps", settings.ig_steps)->capture_default_str();
  exp->add_option("--occlusion-patch", settings.occlusion.patch)->capture_default_str();
  exp->add_option("--occlusion-stride", settings.occlusion.stride)->capture_default_str();
  exp->add_option("--seed", seed, "Seed for the random explainer")->capture_default_str();
  exp->add_option("--out", out, "Saliency map output")->required();
  exp->add_option("--overlay", overlay, "Also write an overlay PPM");

  auto* ev = app.add_subcommand("eval", "Run a full evaluation and write a report directory");
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> explainers, metrics;
  std::string eval_remote;
  bool quiet = false;
  ev->add_option("--config", config_path, "key = value config file");
  for (const auto& key : kConfigKeys) {
    ev->add_option_function<std::string>(
        flag_name(key), [&overrides, key](const std::string& v) { overrides[key] = v; },
        "Overrides config key " + key);
  }
  ev->add_option("--explainer", explainers, "Explainer (repeatable)");
  ev->add_option("--metric", metrics, "Metric (repeatable)");
  ev->add_option("--remote", eval_remote, "Scorer bridge command");
  ev->add_flag("--quiet", quiet, "No progress output");

  auto* rep = app.add_subcommand("report", "Regenerate summary.md and significance.csv from metrics.csv");
  std::string report_dir;
  rep->add_option("dir", report_dir, "Report directory")->required();

  auto* self = app.add_subcommand("selftest", "Quick internal consistency checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_gen_data(tax, per_class, seed, out);
    if (*tr) {
      return run_train(tax, train_per_class, val_per_class, topts, seed, out);
    }
    if (*grp) return run_groups(hierarchy, tax, min_group_size);
    if (*exp) {
      return run_explain(model, remote, image, explainer, query, settings, seed, out, overlay);
    }
    if (*ev) return run_eval(config_path, overrides, explainers, metrics, eval_remote, quiet);
    if (*rep) {
      regenerate_report(report_dir);
      return 0;
    }
    if (*self) return run_selftest();
  } catch (const rfxg::Error& e) {
    fmt::print(stderr, "rfxg: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "rfxg: {}\n", e.what());
    return 1;
  }
  return 1;
}
