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
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfxg/config.hpp"
#include "rfxg/error.hpp"
#include "rfxg/explainers.hpp"
#include "rfxg/metrics.hpp"
#include "rfxg/ontology.hpp"
#include "rfxg/query.hpp"
#include "rfxg/scorer.hpp"
#include "rfxg/synthetic.hpp"

namespace rfxg {

// The image cannot be evaluated (for example A's group is a singleton).
class CaseSkipped : public Error {
 public:
  using Error::Error;
};

// Classes and groups an image is explained with.
struct CaseSelection {
  std::size_t class_a = 0;
  std::size_t class_b = 0;
  std::vector<std::size_t> group_a;   // primary group of A
  std::vector<std::size_t> contrast;  // group_a without A
  std::vector<std::size_t> group_b;   // primary group of the best class outside group_a
  std::string group_a_label;
  std::string group_b_label;

  friend bool operator==(const CaseSelection&, const CaseSelection&) = default;
};

// A = argmax probs; B = argmax over group_a \ {A}; group_b = primary group of
// the highest-scoring class whose primary group does not intersect group_a.
// Ties go to the lower class index. Throws CaseSkipped when A's group has a
// single member or no disjoint group exists.
CaseSelection select_cases(std::span<const double> probs, const GroupTable& groups);
CaseSelection select_cases(const Scorer& scorer, const ImageTensor& image,
                           const GroupTable& groups);

// A query together with the metric of its cell.
struct CaseQuery {
  Metric metric;
  Query query;
};

// Deletion <- PointwiseClass(A), CCS <- ContrastiveClass(A, B),
// CGC <- ClassVsGroup(A, contrast), PGS <- PointwiseGroup(group_a),
// CGS <- ContrastiveGroup(group_a, group_b); only the requested metrics, in
// that order.
std::vector<CaseQuery> case_queries(const CaseSelection& selection,
                                    std::span<const Metric> metrics);

// Maps of one explainer for every query of a case, in query order.
struct ExplainerMaps {
  ExplainerKind explainer;
  std::vector<SaliencyMap> maps;
};

// Occlusion shares one patch sweep across the queries; random draws a single
// map from random_seed and reuses it for every query.
ExplainerMaps generate_case_maps(ExplainerKind explainer, const Scorer& scorer,
                                 const ImageTensor& image, std::span<const CaseQuery> queries,
                                 const ExplainerSettings& settings, std::uint64_t random_seed);

struct ScoreRow {
  std::string image_id;
  Metric metric;
  std::string explainer;
  std::string query;
  double score = 0.0;
  PerturbationCurve curve;  // empty unless curves were requested
};

// Scores every map against the metric of its query.
std::vector<ScoreRow> score_case(const Scorer& scorer, const ImageTensor& image,
                                 const std::string& image_id, std::span<const CaseQuery> queries,
                                 std::span<const ExplainerMaps> maps,
                                 const MetricOptions& options, bool keep_curves = false);

// Inputs of a run once data, model and groups are resolved.
struct RunInputs {
  std::vector<LabeledImage> images;
  std::vector<std::string> image_ids;
  std::shared_ptr<const Scorer> scorer;
  GroupTable groups;
  std::vector<EpochStats> training;  // empty unless the model was trained
  std::optional<double> validation_accuracy;
  std::shared_ptr<const ToyConvNet> trained;  // set when the model was trained
};

// Generates or loads the evaluation images, loads, trains or launches the
// model, and builds the group table.
RunInputs prepare_run(const ExperimentConfig& cfg);

enum class ImageStatus { kProcessed, kSkipped, kFailed };

struct ImageRecord {
  std::string image_id;
  std::size_t label = 0;
  ImageStatus status = ImageStatus::kProcessed;
  std::string reason;  // skip or failure reason
  std::vector<double> probs;
  std::optional<CaseSelection> selection;
};

struct ReportBundle {
  std::vector<ImageRecord> images;
  std::vector<ScoreRow> rows;  // ordered by image, then explainer, then query
  std::vector<std::string> explainers;  // "random" last
  std::vector<Metric> metrics;
  std::size_t processed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;

  // 0 normally, 2 when there were no input images, 3 when more than 10% of
  // the images failed.
  int exit_code() const;
};

// Runs every image through selection, explanation and scoring. Per-image
// failures are recorded and the run continues. Images are handed to
// cfg.threads workers; results are ordered by image index.
// `progress` is called after each finished image with (done, total).
using ProgressFn = std::function<void(std::size_t, std::size_t)>;
ReportBundle evaluate(const ExperimentConfig& cfg, const RunInputs& inputs,
                      const ProgressFn& progress = {});

// prepare_run + evaluate + write_report into cfg.output.
ReportBundle run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

}  // namespace rfxg
