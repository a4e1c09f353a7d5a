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

#include "rfxg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "rfxg/convnet.hpp"
#include "rfxg/random.hpp"
#include "rfxg/remote_scorer.hpp"
#include "rfxg/report.hpp"

namespace rfxg {
namespace {

// Stream tags for mix_seed(cfg.seed, tag).
constexpr std::uint64_t kTrainData = 0;
constexpr std::uint64_t kValidationData = 1;
constexpr std::uint64_t kEvalData = 2;
constexpr std::uint64_t kInit = 3;
constexpr std::uint64_t kShuffle = 4;
constexpr std::uint64_t kRandomMaps = 5;

bool disjoint(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return false;
    if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return true;
}

MetricScore score_query(const PerturbationProbes& probes, const CaseQuery& q) {
  switch (q.metric) {
    case Metric::kDeletion:
      return deletion(probes, std::get<PointwiseClass>(q.query).a);
    case Metric::kCcs: {
      const auto& c = std::get<ContrastiveClass>(q.query);
      return ccs(probes, c.a, c.b);
    }
    case Metric::kCgc: {
      const auto& c = std::get<ClassVsGroup>(q.query);
      return cgc(probes, c.a, c.group_b);
    }
    case Metric::kPgs:
      return pgs(probes, std::get<PointwiseGroup>(q.query).group);
    case Metric::kCgs: {
      const auto& c = std::get<ContrastiveGroup>(q.query);
      return cgs(probes, c.group_a, c.group_b);
    }
  }
  throw InvalidArgument("unhandled metric");
}

}  // namespace

CaseSelection select_cases(std::span<const double> probs, const GroupTable& groups) {
  const std::size_t n = groups.class_count();
  if (probs.size() != n) {
    throw DimensionError(fmt::format("{} probabilities for {} classes", probs.size(), n));
  }
  if (n < 2) throw CaseSkipped("fewer than two classes");

  CaseSelection sel;
  sel.class_a = argmax(probs);
  const SemanticGroup& ga = groups.primary_group(sel.class_a);
  sel.group_a = ga.members;
  sel.group_a_label = ga.label;
  if (sel.group_a.size() < 2) {
    throw CaseSkipped(fmt::format("group '{}' of class {} has a single member", ga.label,
                                  groups.class_name(sel.class_a)));
  }
  for (std::size_t c : sel.group_a) {
    if (c != sel.class_a) sel.contrast.push_back(c);
  }
  sel.class_b = sel.contrast.front();
  for (std::size_t c : sel.contrast) {
    if (probs[c] > probs[sel.class_b]) sel.class_b = c;
  }

  std::vector<std::size_t> outside;
  for (std::size_t c = 0; c < n; ++c) {
    if (!std::binary_search(sel.group_a.begin(), sel.group_a.end(), c)) outside.push_back(c);
  }
  std::stable_sort(outside.begin(), outside.end(),
                   [&](std::size_t x, std::size_t y) { return probs[x] > probs[y]; });
  for (std::size_t c : outside) {
    const SemanticGroup& gb = groups.primary_group(c);
    if (disjoint(gb.members, sel.group_a)) {
      sel.group_b = gb.members;
      sel.group_b_label = gb.label;
      return sel;
    }
  }
  throw CaseSkipped(fmt::format("no group disjoint from '{}'", ga.label));
}

CaseSelection select_cases(const Scorer& scorer, const ImageTensor& image,
                           const GroupTable& groups) {
  return select_cases(scorer.probabilities(image), groups);
}

std::vector<CaseQuery> case_queries(const CaseSelection& sel, std::span<const Metric> metrics) {
  const auto wanted = [&](Metric m) {
    return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
  };
  std::vector<CaseQuery> out;
  if (wanted(Metric::kDeletion)) out.push_back({Metric::kDeletion, PointwiseClass{sel.class_a}});
  if (wanted(Metric::kCcs)) {
    out.push_back({Metric::kCcs, ContrastiveClass{sel.class_a, sel.class_b}});
  }
  if (wanted(Metric::kCgc)) out.push_back({Metric::kCgc, ClassVsGroup{sel.class_a, sel.contrast}});
  if (wanted(Metric::kPgs)) out.push_back({Metric::kPgs, PointwiseGroup{sel.group_a}});
  if (wanted(Metric::kCgs)) {
    out.push_back({Metric::kCgs, ContrastiveGroup{sel.group_a, sel.group_b}});
  }
  return out;
}

ExplainerMaps generate_case_maps(ExplainerKind explainer, const Scorer& scorer,
                                 const ImageTensor& image, std::span<const CaseQuery> queries,
                                 const ExplainerSettings& settings, std::uint64_t random_seed) {
  ExplainerMaps out{explainer, {}};
  if (explainer == ExplainerKind::kRandom) {
    const SaliencyMap map = explain_random(image.height(), image.width(), random_seed);
    out.maps.assign(queries.size(), map);
    return out;
  }
  if (explainer == ExplainerKind::kOcclusion) {
    std::vector<ObjectiveVector> objectives;
    for (const auto& q : queries) {
      objectives.push_back(query_to_objective(q.query, scorer.class_count()));
    }
    out.maps = explain_occlusion(scorer, image, objectives, settings.occlusion);
    return out;
  }
  for (const auto& q : queries) {
    out.maps.push_back(explain(explainer, scorer, image, q.query, settings, random_seed));
  }
  return out;
}

std::vector<ScoreRow> score_case(const Scorer& scorer, const ImageTensor& image,
                                 const std::string& image_id, std::span<const CaseQuery> queries,
                                 std::span<const ExplainerMaps> maps,
                                 const MetricOptions& options, bool keep_curves) {
  std::vector<ScoreRow> rows;
  for (const auto& em : maps) {
    if (em.maps.size() != queries.size()) {
      throw DimensionError("explainer maps do not match the case queries");
    }
    PerturbationProbes probes;
    const SaliencyMap* probed = nullptr;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      if (probed == nullptr || !(*probed == em.maps[q])) {
        probes = probe_perturbations(scorer, image, em.maps[q], options);
        probed = &em.maps[q];
      }
      MetricScore s = score_query(probes, queries[q]);
      ScoreRow row;
      row.image_id = image_id;
      row.metric = queries[q].metric;
      row.explainer = to_string(em.explainer);
      row.query = format_query(queries[q].query);
      row.score = s.score;
      if (keep_curves) row.curve = std::move(s.curve);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

RunInputs prepare_run(const ExperimentConfig& cfg) {
  cfg.validate();
  RunInputs in;
  if (cfg.dataset == DatasetSource::kSynthetic) {
    in.images = generate_dataset(cfg.taxonomy, cfg.eval_per_class, mix_seed(cfg.seed, kEvalData));
  } else {
    in.images = import_dataset(cfg.dataset_dir);
  }
  for (std::size_t i = 0; i < in.images.size(); ++i) in.image_ids.push_back(fmt::format("img_{:05d}", i));

  Hierarchy hierarchy;
  if (!cfg.hierarchy.empty()) {
    std::ifstream file(cfg.hierarchy);
    if (!file) throw InvalidArgument(fmt::format("cannot open {}", cfg.hierarchy.string()));
    hierarchy = parse_hierarchy(file);
  } else {
    hierarchy = parse_hierarchy(cfg.taxonomy.hierarchy_text());
  }
  in.groups = build_groups(hierarchy, cfg.min_group_size);

  switch (cfg.model) {
    case ModelSource::kTrain: {
      const auto& tax = cfg.taxonomy;
      const auto train_set = generate_dataset(tax, cfg.train_per_class, mix_seed(cfg.seed, kTrainData));
      const auto val_set = generate_dataset(tax, cfg.val_per_class, mix_seed(cfg.seed, kValidationData));
      auto net = std::make_shared<ToyConvNet>(ToyConvNet::initialized(
          Architecture::standard(tax.side, tax.class_count()), mix_seed(cfg.seed, kInit)));
      TrainingOptions opts = cfg.training;
      opts.seed = mix_seed(cfg.seed, kShuffle);
      in.training = train(*net, train_set, val_set, opts);
      if (!in.training.empty()) in.validation_accuracy = in.training.back().validation_accuracy;
      in.trained = net;
      in.scorer = net;
      break;
    }
    case ModelSource::kCheckpoint:
      in.scorer = std::make_shared<ToyConvNet>(load_checkpoint(cfg.checkpoint));
      break;
    case ModelSource::kRemote:
      in.scorer = std::shared_ptr<const Scorer>(RemoteScorer::launch(cfg.remote_command));
      break;
  }
  if (in.scorer->class_count() != in.groups.class_count()) {
    throw InvalidArgument(fmt::format("model has {} classes but the hierarchy has {}",
                                      in.scorer->class_count(), in.groups.class_count()));
  }
  for (const auto& img : in.images) {
    if (img.label >= in.groups.class_count()) {
      throw InvalidArgument(fmt::format("image label {} outside {} classes", img.label,
                                        in.groups.class_count()));
    }
  }
  return in;
}

int ReportBundle::exit_code() const {
  if (images.empty()) return 2;
  if (failed * 10 > images.size()) return 3;
  return 0;
}

ReportBundle evaluate(const ExperimentConfig& cfg, const RunInputs& inputs,
                      const ProgressFn& progress) {
  const std::size_t n = inputs.images.size();
  ReportBundle bundle;
  bundle.metrics = cfg.metrics;
  std::sort(bundle.metrics.begin(), bundle.metrics.end());
  std::vector<ExplainerKind> explainers = cfg.explainers;
  explainers.push_back(ExplainerKind::kRandom);
  for (auto e : explainers) bundle.explainers.push_back(to_string(e));

  bundle.images.resize(n);
  std::vector<std::vector<ScoreRow>> rows(n);
  const Scorer& scorer = *inputs.scorer;
  const ExplainerSettings settings = cfg.explainer_settings();
  const MetricOptions options = cfg.metric_options();
  const std::uint64_t random_base = mix_seed(cfg.seed, kRandomMaps);

  const auto process = [&](std::size_t i) {
    ImageRecord& rec = bundle.images[i];
    rec.image_id = inputs.image_ids[i];
    rec.label = inputs.images[i].label;
    const ImageTensor& image = inputs.images[i].image;
    try {
      rec.probs = scorer.probabilities(image);
      const CaseSelection sel = select_cases(rec.probs, inputs.groups);
      rec.selection = sel;
      const auto queries = case_queries(sel, bundle.metrics);
      std::vector<ExplainerMaps> maps;
      for (auto e : explainers) {
        maps.push_back(generate_case_maps(e, scorer, image, queries, settings, mix_seed(random_base, i)));
      }
      rows[i] = score_case(scorer, image, rec.image_id, queries, maps, options, cfg.dump_curves);
      for (auto& r : rows[i]) r.score = std::round(r.score * 1e6) / 1e6;
      rec.status = ImageStatus::kProcessed;
    } catch (const CaseSkipped& e) {
      rec.status = ImageStatus::kSkipped;
      rec.reason = e.what();
      rows[i].clear();
    } catch (const std::exception& e) {
      rec.status = ImageStatus::kFailed;
      rec.reason = e.what();
      rows[i].clear();
    }
  };

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      process(i);
      const std::size_t d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, n);
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < n; ++i) {
    switch (bundle.images[i].status) {
      case ImageStatus::kProcessed:
        ++bundle.processed;
        break;
      case ImageStatus::kSkipped:
        ++bundle.skipped;
        break;
      case ImageStatus::kFailed:
        ++bundle.failed;
        break;
    }
    for (auto& r : rows[i]) bundle.rows.push_back(std::move(r));
  }
  return bundle;
}

ReportBundle run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
  const RunInputs inputs = prepare_run(cfg);
  ReportBundle bundle = evaluate(cfg, inputs, progress);
  write_report(cfg.output, cfg, inputs, bundle);
  return bundle;
}

}  // namespace rfxg
