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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfxg/experiment.hpp"
#include "rfxg/stats.hpp"

namespace rfxg {

// Fixed six-decimal rendering used for every score written to disk.
std::string format_score(double score);

// "image-id,metric,explainer,query,score" with a header line.
void write_metrics_csv(std::ostream& out, std::span<const ScoreRow> rows);
// Inverse of write_metrics_csv (curves are not stored there). Throws
// FormatError on malformed rows.
std::vector<ScoreRow> read_metrics_csv(std::istream& in);

struct SignificanceRow {
  Metric metric;
  std::string explainer_a;
  std::string explainer_b;
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::optional<PairedTest> test;  // absent with fewer than two paired images
};

// Paired tests per metric over the images both explainers scored: every
// explainer against "random" (random included), then every other pair in
// order of first appearance.
std::vector<SignificanceRow> compute_significance(std::span<const ScoreRow> rows);

// "metric,explainer_a,explainer_b,n,mean_a,mean_b,mean_diff,t,p"
std::string format_significance_csv(std::span<const SignificanceRow> rows);
// Markdown tables of mean scores and of the tests against random.
std::string format_summary(std::span<const ScoreRow> rows);

// Writes the whole report directory for a finished run: metrics.csv,
// summary.md, significance.csv, selections.tsv, probs.tsv, skipped.tsv,
// groups.tsv, run.tsv, config.txt, plus training.tsv and model.ckpt for a
// trained model, curves/ when requested and overlays/ for the first images.
void write_report(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                  const RunInputs& inputs, const ReportBundle& bundle);

// Rewrites summary.md and significance.csv from dir/metrics.csv.
void regenerate_report(const std::filesystem::path& dir);

}  // namespace rfxg
