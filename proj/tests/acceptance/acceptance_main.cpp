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

// Acceptance checks for the evaluation engine. Prints one PASS or FAIL line
// per criterion (indented lines are diagnostics) and exits non-zero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "linear_scorer.hpp"
#include "rfxg/config.hpp"
#include "rfxg/convnet.hpp"
#include "rfxg/experiment.hpp"
#include "rfxg/explainers.hpp"
#include "rfxg/metrics.hpp"
#include "rfxg/ontology.hpp"
#include "rfxg/perturbation.hpp"
#include "rfxg/query.hpp"
#include "rfxg/random.hpp"
#include "rfxg/report.hpp"
#include "rfxg/stats.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

using namespace rfxg;

constexpr double kFdStep = 1e-3;
constexpr double kFdTolerance = 1e-3;
constexpr double kFdFloor = 1e-6;
constexpr double kFdSeconds = 60.0;
constexpr double kIgTolerance = 0.01;
constexpr double kIgLinearTolerance = 1e-9;
constexpr double kCamTolerance = 1e-6;
constexpr double kOracleTolerance = 1e-9;
constexpr double kNormTolerance = 1e-9;
constexpr double kAlpha = 0.05;
constexpr double kMinAccuracy = 0.90;
constexpr double kSeparationSeconds = 900.0;
constexpr std::size_t kSeparationPerClass = 20;
constexpr std::uint64_t kRandomMapsTag = 5;

struct Verdict {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel_error(double reference, double value) {
  return std::abs(reference - value) /
         std::max({std::abs(reference), std::abs(value), kFdFloor});
}

ImageTensor with_value(const ImageTensor& image, std::size_t index, double value) {
  std::vector<double> data(image.data().begin(), image.data().end());
  data[index] = value;
  return ImageTensor(image.height(), image.width(), image.channels(), std::move(data));
}

std::vector<double> contrast_weights(std::size_t classes, std::size_t a, std::size_t b) {
  std::vector<double> w(classes, 0.0);
  w[a] = 1.0;
  w[b] = -1.0;
  return w;
}

double weighted(std::span<const double> w, std::span<const double> scores) {
  double s = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) s += w[c] * scores[c];
  return s;
}

// ---------------------------------------------------------------------------
// Gradient correctness

// True when every logit changes by the same amount over [x-h, x] and
// [x, x+h], i.e. no rectifier switches inside the stencil.
bool locally_linear(const ToyConvNet& net, const ImageTensor& minus, const ImageTensor& centre,
                    const ImageTensor& plus) {
  const auto zm = *net.logits(minus);
  const auto z0 = *net.logits(centre);
  const auto zp = *net.logits(plus);
  for (std::size_t c = 0; c < z0.size(); ++c) {
    const double right = zp[c] - z0[c];
    const double left = z0[c] - zm[c];
    if (std::abs(right - left) > 1e-9 * std::max(1.0, std::abs(right))) return false;
  }
  return true;
}

Verdict check_gradients(const ToyConvNet& net, const std::vector<LabeledImage>& images) {
  const auto start = Clock::now();
  const std::size_t classes = net.class_count();
  const std::size_t n_images = 10;
  const std::size_t per_case = 5;
  Rng rng(mix_seed(7, 101));
  double worst_input = 0.0, worst_act = 0.0;
  std::size_t n_input = 0, n_act = 0, rejected = 0;
  for (std::size_t i = 0; i < n_images; ++i) {
    const ImageTensor& image = images[i * images.size() / n_images].image;
    for (const ScoreSpace space : {ScoreSpace::kLogits, ScoreSpace::kProbabilities}) {
      const std::size_t a = rng.below(classes);
      const std::size_t b = (a + 1 + rng.below(classes - 1)) % classes;
      const auto w = contrast_weights(classes, a, b);

      const auto grad = net.backward_input(image, w, space);
      std::size_t accepted = 0;
      for (std::size_t attempt = 0; accepted < per_case && attempt < 1000; ++attempt) {
        const std::size_t idx = rng.below(image.size());
        const double x = image.data()[idx];
        if (x < kFdStep || x > 1.0 - kFdStep) continue;
        const ImageTensor plus = with_value(image, idx, x + kFdStep);
        const ImageTensor minus = with_value(image, idx, x - kFdStep);
        if (!locally_linear(net, minus, image, plus)) {
          ++rejected;
          continue;
        }
        const double fd =
            (net.objective(plus, w, space) - net.objective(minus, w, space)) / (2 * kFdStep);
        worst_input = std::max(worst_input, rel_error(fd, grad[idx]));
        ++accepted;
      }
      n_input += accepted;

      const ForwardRecord rec = net.forward(image);
      const FeatureMaps dact = net.backward_activations(image, w, space);
      for (std::size_t k = 0; k < per_case; ++k) {
        const std::size_t idx = rng.below(rec.activations.size());
        FeatureMaps plus = rec.activations, minus = rec.activations;
        plus.values[idx] += kFdStep;
        minus.values[idx] -= kFdStep;
        const auto rp = net.head_forward(plus);
        const auto rm = net.head_forward(minus);
        const bool logits = space == ScoreSpace::kLogits;
        const double fd = (weighted(w, logits ? rp.logits : rp.probs) -
                           weighted(w, logits ? rm.logits : rm.probs)) /
                          (2 * kFdStep);
        worst_act = std::max(worst_act, rel_error(fd, dact.values[idx]));
        ++n_act;
      }
    }
  }
  const double elapsed = seconds_since(start);
  Verdict v;
  v.pass = n_input >= 50 && n_act >= 50 && worst_input < kFdTolerance &&
           worst_act < kFdTolerance && elapsed < kFdSeconds;
  v.detail = fmt::format(
      "input {} coords max rel err {:.3e}, activation {} coords max rel err {:.3e} "
      "(tol {:.0e}), {} images, {:.1f}s (limit {:.0f}s)",
      n_input, worst_input, n_act, worst_act, kFdTolerance, n_images, elapsed, kFdSeconds);
  v.notes.push_back(fmt::format("{} input coordinates skipped at rectifier kinks", rejected));
  return v;
}

// ---------------------------------------------------------------------------
// Integrated-gradients completeness

Verdict check_ig(const ToyConvNet& net, const std::vector<LabeledImage>& images) {
  const std::size_t n_images = 20;
  double worst = 0.0;
  for (std::size_t i = 0; i < n_images; ++i) {
    const ImageTensor& image = images[i * images.size() / n_images].image;
    const std::size_t a = argmax(net.probabilities(image));
    const auto objective = ObjectiveVector::single(net.class_count(), a);
    const ImageTensor baseline(image.height(), image.width(), image.channels(), 0.0);
    const auto attr = integrated_gradients(net, image, objective, baseline, 256);
    double total = 0.0;
    for (double v : attr) total += v;
    const double delta = net.objective(image, objective.weights(), ScoreSpace::kLogits) -
                         net.objective(baseline, objective.weights(), ScoreSpace::kLogits);
    worst = std::max(worst, std::abs(total - delta) / std::abs(delta));
  }

  const std::size_t side = 4, channels = 3, classes = 5;
  const auto linear = testing::LinearSoftmaxScorer::random(classes, side * side * channels, 211);
  Rng rng(212);
  double worst_linear = 0.0;
  for (std::size_t trial = 0; trial < 10; ++trial) {
    std::vector<double> data(side * side * channels);
    for (double& v : data) v = rng.uniform();
    const ImageTensor image(side, side, channels, std::move(data));
    const std::size_t a = rng.below(classes);
    const std::size_t b = (a + 1 + rng.below(classes - 1)) % classes;
    const ObjectiveVector objective(contrast_weights(classes, a, b));
    const ImageTensor baseline(side, side, channels, 0.0);
    const auto attr = integrated_gradients(linear, image, objective, baseline, 16);
    double total = 0.0;
    for (double v : attr) total += v;
    const double delta = linear.objective(image, objective.weights(), ScoreSpace::kLogits) -
                         linear.objective(baseline, objective.weights(), ScoreSpace::kLogits);
    worst_linear = std::max(worst_linear, std::abs(total - delta));
  }

  Verdict v;
  v.pass = worst < kIgTolerance && worst_linear <= kIgLinearTolerance;
  v.detail = fmt::format(
      "trained model {} images at 256 steps max rel gap {:.3e} (tol {:.0e}); "
      "linear fixture max abs gap {:.3e} (tol {:.0e})",
      n_images, worst, kIgTolerance, worst_linear, kIgLinearTolerance);
  return v;
}

// ---------------------------------------------------------------------------
// Contrastive Grad-CAM linearity

Verdict check_gradcam(const ToyConvNet& net, const std::vector<LabeledImage>& images) {
  const std::size_t classes = net.class_count();
  Rng rng(mix_seed(7, 103));
  double worst_grid = 0.0, worst_map = 0.0;
  for (std::size_t trial = 0; trial < 20; ++trial) {
    const ImageTensor& image = images[rng.below(images.size())].image;
    const std::size_t a = rng.below(classes);
    const std::size_t b = (a + 1 + rng.below(classes - 1)) % classes;
    const auto wa = ObjectiveVector::single(classes, a);
    const auto wb = ObjectiveVector::single(classes, b);
    const auto both = gradcam_grid(net, image, wa - wb, false).grid;
    const auto ga = gradcam_grid(net, image, wa, false).grid;
    const auto gb = gradcam_grid(net, image, wb, false).grid;
    for (std::size_t j = 0; j < both.size(); ++j) {
      worst_grid = std::max(worst_grid, std::abs(both.values()[j] -
                                                 (ga.values()[j] - gb.values()[j])));
    }
    const auto map_both = explain_gradcam(net, image, wa - wb, false);
    const auto map_a = explain_gradcam(net, image, wa, false);
    const auto map_b = explain_gradcam(net, image, wb, false);
    for (std::size_t j = 0; j < map_both.size(); ++j) {
      worst_map = std::max(worst_map, std::abs(map_both.values()[j] -
                                               (map_a.values()[j] - map_b.values()[j])));
    }
  }
  Verdict v;
  v.pass = worst_grid <= kCamTolerance && worst_map <= kCamTolerance;
  v.detail = fmt::format(
      "20 triples: activation-grid max abs diff {:.3e}, image-resolution max abs diff {:.3e} "
      "(tol {:.0e})",
      worst_grid, worst_map, kCamTolerance);
  return v;
}

// ---------------------------------------------------------------------------
// Metric oracle

struct OracleCase {
  std::size_t side;
  std::vector<double> map;
};

// Indices of the k largest map values; ties go to the smaller index.
std::vector<bool> oracle_mask(const std::vector<double>& map, std::size_t k) {
  std::vector<bool> chosen(map.size(), false);
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = map.size();
    for (std::size_t j = 0; j < map.size(); ++j) {
      if (chosen[j]) continue;
      if (best == map.size() || map[j] > map[best]) best = j;
    }
    chosen[best] = true;
  }
  return chosen;
}

std::vector<double> oracle_probs(const testing::LinearSoftmaxScorer& s,
                                 const std::vector<double>& x) {
  std::vector<double> z(s.class_count());
  for (std::size_t c = 0; c < z.size(); ++c) {
    z[c] = s.bias(c);
    for (std::size_t j = 0; j < x.size(); ++j) z[c] += s.weight(c, j) * x[j];
  }
  const double top = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) total += (v = std::exp(v - top));
  for (double& v : z) v /= total;
  return z;
}

double oracle_mean(const std::vector<double>& p, const std::vector<std::size_t>& set) {
  double s = 0.0;
  for (std::size_t k : set) s += p[k];
  return s / static_cast<double>(set.size());
}

Verdict check_metric_oracle() {
  const std::size_t channels = 3, classes = 6;
  const std::size_t a = 0, b = 1;
  const std::vector<std::size_t> group_a = {0, 1, 2}, rest = {1, 2}, group_b = {3, 4};
  const std::vector<double> alphas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

  std::vector<OracleCase> cases;
  cases.push_back({2, {0.5, 0.5, 0.2, 0.9}});
  {
    Rng rng(301);
    std::vector<double> m(16);
    for (double& v : m) v = static_cast<double>(rng.below(5)) - 2.0;
    cases.push_back({4, m});
  }

  double worst = 0.0;
  std::size_t comparisons = 0, enumerated = 0;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& oc = cases[ci];
    const std::size_t n = oc.side * oc.side;
    const auto scorer = testing::LinearSoftmaxScorer::random(classes, n * channels, 400 + ci, 2.0);
    Rng rng(500 + ci);
    std::vector<double> x(n * channels);
    for (double& v : x) v = rng.uniform();
    const ImageTensor image(oc.side, oc.side, channels, x);
    const SaliencyMap map(oc.side, oc.side, oc.map);

    for (const std::string fill_name : {"black", "mean"}) {
      std::vector<double> fill_value(channels, 0.0);
      if (fill_name == "mean") {
        for (std::size_t p = 0; p < n; ++p) {
          for (std::size_t c = 0; c < channels; ++c) fill_value[c] += x[p * channels + c] / n;
        }
      }
      const auto clean = oracle_probs(scorer, x);
      std::vector<std::vector<double>> probs;
      for (double alpha : alphas) {
        const auto k = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 0.5));
        const auto mask = oracle_mask(oc.map, k);
        std::vector<double> xa = x;
        for (std::size_t p = 0; p < n; ++p) {
          if (!mask[p]) continue;
          for (std::size_t c = 0; c < channels; ++c) xa[p * channels + c] = fill_value[c];
        }
        probs.push_back(oracle_probs(scorer, xa));
        ++enumerated;
      }
      auto integrate = [&](const std::function<double(const std::vector<double>&)>& f) {
        double area = 0.0;
        for (std::size_t i = 0; i + 1 < alphas.size(); ++i) {
          area += (alphas[i + 1] - alphas[i]) * (f(probs[i]) + f(probs[i + 1])) / 2.0;
        }
        return 100.0 * area / (alphas.back() - alphas.front());
      };
      const double o_ccs = integrate([&](const auto& p) { return p[b] - p[a]; });
      const double o_cgc = integrate([&](const auto& p) {
        return 0.5 * ((oracle_mean(p, rest) - oracle_mean(clean, rest)) + clean[a] - p[a]);
      });
      const double o_pgs =
          integrate([&](const auto& p) { return oracle_mean(clean, group_a) - oracle_mean(p, group_a); });
      const double o_cgs = integrate([&](const auto& p) {
        return 0.5 * ((oracle_mean(clean, group_a) - oracle_mean(p, group_a)) +
                      (oracle_mean(p, group_b) - oracle_mean(clean, group_b)));
      });
      const double o_del = integrate([&](const auto& p) { return p[a]; });

      MetricOptions options;
      options.fill = MaskFill::parse(fill_name);
      const double lib[] = {
          ccs(scorer, image, map, a, b, options).score,
          cgc(scorer, image, map, a, rest, options).score,
          pgs(scorer, image, map, group_a, options).score,
          cgs(scorer, image, map, group_a, group_b, options).score,
          deletion(scorer, image, map, a, options).score,
      };
      const double oracle[] = {o_ccs, o_cgc, o_pgs, o_cgs, o_del};
      for (std::size_t m = 0; m < 5; ++m) {
        worst = std::max(worst, std::abs(lib[m] - oracle[m]));
        ++comparisons;
      }
    }
  }
  Verdict v;
  v.pass = worst <= kOracleTolerance;
  v.detail = fmt::format(
      "2x2 and 4x4 fixtures, black and mean fills, {} masked images enumerated, "
      "{} metric comparisons, max abs diff {:.3e} (tol {:.0e})",
      enumerated, comparisons, worst, kOracleTolerance);
  return v;
}

// ---------------------------------------------------------------------------
// Normalization identity

Verdict check_normalization(const ToyConvNet& net, const std::vector<LabeledImage>& images,
                            const GroupTable& groups) {
  const std::size_t classes = net.class_count();
  std::vector<std::size_t> all(classes);
  for (std::size_t c = 0; c < classes; ++c) all[c] = c;
  Rng rng(mix_seed(7, 105));
  double worst_pgs = 0.0;
  std::size_t antisymmetry_breaks = 0;
  const MetricOptions options;
  for (std::size_t trial = 0; trial < 100; ++trial) {
    const ImageTensor& image = images[rng.below(images.size())].image;
    SaliencyMap map;
    if (trial % 2 == 0) {
      map = explain_random(image.height(), image.width(), mix_seed(7, 1000 + trial));
    } else {
      const auto obj = ObjectiveVector::single(classes, rng.below(classes));
      map = explain_gradient(net, image, obj);
    }
    const auto probes = probe_perturbations(net, image, map, options);
    worst_pgs = std::max(worst_pgs, std::abs(pgs(probes, all).score));

    const std::size_t ng = groups.groups().size();
    const std::size_t ga = rng.below(ng);
    const std::size_t gb = (ga + 1 + rng.below(ng - 1)) % ng;
    const auto& ma = groups.groups()[ga].members;
    const auto& mb = groups.groups()[gb].members;
    const auto fwd = cgs(probes, ma, mb);
    const auto rev = cgs(probes, mb, ma);
    bool exact = fwd.score == -rev.score && fwd.auc == -rev.auc;
    for (std::size_t i = 0; i < fwd.curve.scores.size(); ++i) {
      exact = exact && fwd.curve.scores[i] == -rev.curve.scores[i];
    }
    if (!exact) ++antisymmetry_breaks;
  }
  Verdict v;
  v.pass = worst_pgs <= kNormTolerance && antisymmetry_breaks == 0;
  v.detail = fmt::format(
      "100 pairs: max |PGS over all classes| {:.3e} (tol {:.0e}); "
      "CGS swap not exactly antisymmetric in {} pairs",
      worst_pgs, kNormTolerance, antisymmetry_breaks);
  return v;
}

// ---------------------------------------------------------------------------
// Objective match and fill robustness on the reference image set

struct ReferenceVerdicts {
  Verdict objective_match;
  Verdict fill_robustness;
};

ReferenceVerdicts check_reference_set(const ExperimentConfig& cfg, const RunInputs& inputs) {
  const Scorer& scorer = *inputs.scorer;
  const auto settings = cfg.explainer_settings();
  const std::vector<Metric> metrics = {Metric::kCcs, Metric::kCgc, Metric::kPgs, Metric::kCgs,
                                       Metric::kDeletion};
  const std::vector<ExplainerKind> informed = {ExplainerKind::kGradient,
                                               ExplainerKind::kIntegratedGradients,
                                               ExplainerKind::kGradCam, ExplainerKind::kOcclusion};
  std::vector<std::pair<std::string, MetricOptions>> fills;
  for (const char* name : {"black", "mean", "noise", "blur"}) {
    ExperimentConfig c = cfg;
    c.fill = name;
    fills.emplace_back(name, c.metric_options());
  }

  // (fill, metric, explainer) -> scores
  std::map<std::tuple<std::string, Metric, std::string>, std::vector<double>> scores;
  std::map<ExplainerKind, std::pair<std::vector<double>, std::vector<double>>> match;
  const std::uint64_t random_base = mix_seed(cfg.seed, kRandomMapsTag);
  std::size_t used = 0;
  for (std::size_t i = 0; i < inputs.images.size(); ++i) {
    const ImageTensor& image = inputs.images[i].image;
    CaseSelection sel;
    try {
      sel = select_cases(scorer, image, inputs.groups);
    } catch (const CaseSkipped&) {
      continue;
    }
    ++used;
    const auto queries = case_queries(sel, metrics);
    std::vector<ExplainerMaps> maps;
    for (const auto kind : informed) {
      maps.push_back(generate_case_maps(kind, scorer, image, queries, settings, 0));
    }
    maps.push_back(generate_case_maps(ExplainerKind::kRandom, scorer, image, queries, settings,
                                      mix_seed(random_base, i)));
    for (const auto& [name, options] : fills) {
      for (const auto& row : score_case(scorer, image, inputs.image_ids[i], queries, maps, options)) {
        scores[{name, row.metric, row.explainer}].push_back(row.score);
      }
    }
    const MetricOptions& black = fills.front().second;
    const std::size_t pgs_index = static_cast<std::size_t>(
        std::find_if(queries.begin(), queries.end(),
                     [](const CaseQuery& q) { return q.metric == Metric::kPgs; }) -
        queries.begin());
    for (std::size_t e = 0; e < informed.size(); ++e) {
      const double matched = pgs(scorer, image, maps[e].maps[pgs_index], sel.group_a, black).score;
      const SaliencyMap other =
          explain(informed[e], scorer, image, PointwiseGroup{sel.group_b}, settings);
      const double mismatched = pgs(scorer, image, other, sel.group_a, black).score;
      match[informed[e]].first.push_back(matched);
      match[informed[e]].second.push_back(mismatched);
    }
  }

  ReferenceVerdicts out;
  {
    Verdict& v = out.objective_match;
    v.pass = true;
    std::vector<std::string> parts;
    for (const auto kind : informed) {
      const auto& [m, mm] = match[kind];
      const PairedTest t = paired_t_test(m, mm);
      const double mean_m = MetricResult::from_scores("PGS", m).mean;
      const double mean_mm = MetricResult::from_scores("PGS", mm).mean;
      const bool ok = mean_m > mean_mm && t.p < kAlpha;
      v.pass = v.pass && ok;
      parts.push_back(fmt::format("{} {:.3f}>{:.3f} p={}", to_string(kind), mean_m, mean_mm,
                                  format_p_value(t)));
    }
    v.detail = fmt::format("{} images, matched vs mismatched group PGS (p<{}): {}", used, kAlpha,
                           fmt::join(parts, "; "));
  }
  {
    Verdict& v = out.fill_robustness;
    v.pass = true;
    std::size_t pairs = 0, flips = 0;
    for (const Metric metric : metrics) {
      for (const auto kind : informed) {
        const std::string name = to_string(kind);
        std::vector<std::string> diffs;
        std::set<int> signs;
        for (const auto& [fill, options] : fills) {
          const double d = MetricResult::from_scores("", scores[{fill, metric, name}]).mean -
                           MetricResult::from_scores("", scores[{fill, metric, "random"}]).mean;
          signs.insert(d > 0 ? 1 : (d < 0 ? -1 : 0));
          diffs.push_back(fmt::format("{}={:+.3f}", fill, d));
        }
        ++pairs;
        const bool ok = signs.size() == 1 && *signs.begin() != 0;
        if (!ok) ++flips;
        v.notes.push_back(fmt::format("{} {} {}{}", to_string(metric), name,
                                      fmt::join(diffs, " "), ok ? "" : "  <- sign differs"));
      }
    }
    v.pass = flips == 0;
    v.detail = fmt::format(
        "{} images, black/mean/noise/blur fills: (informed - random) mean sign consistent "
        "for {}/{} explainer-metric pairs",
        used, pairs - flips, pairs);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Separation

Verdict check_separation(const fs::path& work) {
  const auto start = Clock::now();
  ExperimentConfig cfg;
  cfg.eval_per_class = kSeparationPerClass;
  cfg.overlays = 0;
  cfg.output = work / "separation";
  const RunInputs inputs = prepare_run(cfg);
  const ReportBundle bundle = evaluate(cfg, inputs);
  write_report(cfg.output, cfg, inputs, bundle);
  const double elapsed = seconds_since(start);

  Verdict v;
  const double acc = inputs.validation_accuracy.value_or(0.0);
  bool ok = acc >= kMinAccuracy && elapsed < kSeparationSeconds && bundle.processed >= 200;
  std::size_t passed = 0, total = 0;
  for (const auto& row : compute_significance(bundle.rows)) {
    if (row.explainer_b != "random" || row.explainer_a == "random") continue;
    const bool deletion = row.metric == Metric::kDeletion;
    if (deletion && row.explainer_a != "gradient") continue;
    ++total;
    const bool better = deletion ? row.mean_a < row.mean_b : row.mean_a > row.mean_b;
    const bool significant = row.test && row.test->p < kAlpha;
    if (better && significant) ++passed;
    v.notes.push_back(fmt::format("{} {} {:.3f} vs random {:.3f} p={}{}", to_string(row.metric),
                                  row.explainer_a, row.mean_a, row.mean_b,
                                  row.test ? format_p_value(*row.test) : "n/a",
                                  better && significant ? "" : "  <- not separated"));
  }
  ok = ok && total == 17 && passed == total;
  v.pass = ok;
  v.detail = fmt::format(
      "validation accuracy {:.3f} (min {:.2f}), {} images scored, {}/{} comparisons "
      "beat random at p<{}, run {:.0f}s (limit {:.0f}s)",
      acc, kMinAccuracy, bundle.processed, passed, total, kAlpha, elapsed, kSeparationSeconds);
  return v;
}

// ---------------------------------------------------------------------------
// Group construction

GroupTable expected_vehicles() {
  std::vector<std::string> names = {"sports_car", "cab",       "limousine",     "minivan",
                                    "jeep",       "pickup",    "trailer_truck", "school_bus",
                                    "trolleybus", "minibus",   "canoe",         "yawl",
                                    "catamaran",  "speedboat", "gondola",       "liner"};
  std::vector<SemanticGroup> groups = {
      {"car", {0, 1, 2, 3, 4}, false},
      {"truck+bus", {5, 6, 7, 8, 9}, false},
      {"watercraft", {10, 11, 12, 13, 14, 15}, false},
  };
  std::vector<std::size_t> primary = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2};
  return GroupTable(std::move(names), std::move(groups), std::move(primary));
}

constexpr const char* kCarTruck =
    "vehicle\tcar\nvehicle\ttruck\n"
    "car\tsports_car\ncar\tcab\ncar\tlimousine\ncar\tminivan\ncar\tjeep\n"
    "truck\tpickup\ntruck\ttrailer_truck\n"
    "leaf\tsports_car\t0\nleaf\tcab\t1\nleaf\tlimousine\t2\nleaf\tminivan\t3\n"
    "leaf\tjeep\t4\nleaf\tpickup\t5\nleaf\ttrailer_truck\t6\n";

GroupTable expected_car_truck() {
  std::vector<std::string> names = {"sports_car", "cab",    "limousine",    "minivan",
                                    "jeep",       "pickup", "trailer_truck"};
  std::vector<SemanticGroup> groups = {
      {"car", {0, 1, 2, 3, 4}, false},
      {"vehicle", {0, 1, 2, 3, 4, 5, 6}, false},
  };
  std::vector<std::size_t> primary = {0, 0, 0, 0, 0, 1, 1};
  return GroupTable(std::move(names), std::move(groups), std::move(primary));
}

Verdict check_groups(const fs::path& data_dir) {
  std::ifstream in(data_dir / "vehicles_hierarchy.txt");
  const GroupTable vehicles = build_groups(parse_hierarchy(in), 5);
  const GroupTable car_truck = build_groups(parse_hierarchy(std::string_view(kCarTruck)), 5);
  const bool v_ok = vehicles == expected_vehicles();
  const bool c_ok = car_truck == expected_car_truck();
  Verdict v;
  v.pass = v_ok && c_ok;
  v.detail = fmt::format(
      "vehicles fixture (merged label \"truck+bus\") {}; car/truck fixture (common "
      "superordinate \"vehicle\") {}",
      v_ok ? "matches" : "differs", c_ok ? "matches" : "differs");
  if (!v_ok) v.notes.push_back("vehicles got:\n" + format_group_table(vehicles));
  if (!c_ok) v.notes.push_back("car/truck got:\n" + format_group_table(car_truck));
  return v;
}

// ---------------------------------------------------------------------------
// Determinism

std::set<fs::path> tree_files(const fs::path& root) {
  std::set<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.insert(fs::relative(e.path(), root));
  }
  return files;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict check_determinism(const fs::path& first, const fs::path& second) {
  std::vector<double> times;
  for (const auto& out : {first, second}) {
    fs::remove_all(out);
    ExperimentConfig cfg;
    cfg.output = out;
    cfg.dump_curves = true;
    const auto start = Clock::now();
    run_experiment(cfg);
    times.push_back(seconds_since(start));
  }
  const auto fa = tree_files(first);
  const auto fb = tree_files(second);
  std::size_t differing = 0;
  Verdict v;
  if (fa != fb) {
    v.pass = false;
    v.detail = fmt::format("file lists differ ({} vs {} files)", fa.size(), fb.size());
    return v;
  }
  for (const auto& rel : fa) {
    if (file_bytes(first / rel) != file_bytes(second / rel)) {
      ++differing;
      v.notes.push_back("differs: " + rel.string());
    }
  }
  v.pass = differing == 0 && !fa.empty();
  v.detail = fmt::format("{} files compared, {} differ; runs took {:.0f}s and {:.0f}s",
                         fa.size(), differing, times[0], times[1]);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rfxg acceptance checks"};
  fs::path work = fs::temp_directory_path() / "rfxg-acceptance";
  fs::path data_dir = RFXG_TEST_DATA_DIR;
  std::vector<std::string> only;
  app.add_option("--work", work, "Scratch directory for report runs");
  app.add_option("--data", data_dir, "Directory holding the hierarchy fixtures");
  app.add_option("--only", only, "Run only the named criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  std::size_t failures = 0;
  auto selected = [&](const std::string& name) {
    return only.empty() || std::find(only.begin(), only.end(), name) != only.end();
  };
  auto emit = [&](const std::string& name, const std::function<Verdict()>& body) {
    if (!selected(name)) return;
    Verdict v;
    try {
      v = body();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = fmt::format("raised: {}", e.what());
    }
    if (!v.pass) ++failures;
    fmt::print("{} {}: {}\n", v.pass ? "PASS" : "FAIL", name, v.detail);
    for (const auto& note : v.notes) fmt::print("    {}\n", note);
    std::fflush(stdout);
  };

  emit("metric-oracle", check_metric_oracle);
  emit("group-construction", [&] { return check_groups(data_dir); });

  const fs::path det_a = work / "determinism-a";
  const fs::path det_b = work / "determinism-b";
  const bool need_model = selected("gradient-fd") || selected("ig-completeness") ||
                          selected("gradcam-linearity") || selected("normalization") ||
                          selected("objective-match") || selected("fill-robustness");
  if (selected("determinism")) {
    emit("determinism", [&] { return check_determinism(det_a, det_b); });
  } else if (need_model && !fs::exists(det_a / "model.ckpt")) {
    ExperimentConfig cfg;
    cfg.output = det_a;
    cfg.dump_curves = true;
    run_experiment(cfg);
  }

  if (need_model) {
    ExperimentConfig cfg;
    cfg.model = ModelSource::kCheckpoint;
    cfg.checkpoint = det_a / "model.ckpt";
    std::optional<RunInputs> inputs;
    std::optional<ToyConvNet> net;
    std::string load_error;
    try {
      inputs = prepare_run(cfg);
      net = load_checkpoint(cfg.checkpoint);
    } catch (const std::exception& e) {
      load_error = e.what();
    }
    auto with_model = [&](const std::function<Verdict()>& body) {
      return [&, body] {
        if (!net) return Verdict{false, "reference model unavailable: " + load_error, {}};
        return body();
      };
    };
    emit("gradient-fd", with_model([&] { return check_gradients(*net, inputs->images); }));
    emit("ig-completeness", with_model([&] { return check_ig(*net, inputs->images); }));
    emit("gradcam-linearity", with_model([&] { return check_gradcam(*net, inputs->images); }));
    emit("normalization",
         with_model([&] { return check_normalization(*net, inputs->images, inputs->groups); }));
    if (selected("objective-match") || selected("fill-robustness")) {
      std::optional<ReferenceVerdicts> ref;
      auto reference = [&]() -> const ReferenceVerdicts& {
        if (!ref) ref = check_reference_set(cfg, *inputs);
        return *ref;
      };
      emit("objective-match", with_model([&] { return reference().objective_match; }));
      emit("fill-robustness", with_model([&] { return reference().fill_robustness; }));
    }
  }

  emit("separation", [&] { return check_separation(work); });

  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
