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

#include "rfxg/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "rfxg/convnet.hpp"
#include "rfxg/image_io.hpp"
#include "rfxg/overlay.hpp"

namespace rfxg {
namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw InvalidArgument(fmt::format("write to {} failed", path.string()));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(line);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string fixed(double v, int digits) {
  if (v == 0.0) v = 0.0;  // no "-0.000"
  return fmt::format("{:.{}f}", v, digits);
}

std::string format_t(const PairedTest& t) {
  if (std::isinf(t.t)) return t.t > 0 ? "inf" : "-inf";
  return fixed(t.t, 4);
}

// Mean score per (metric, explainer) and the explainers in order of first
// appearance.
struct Table {
  std::vector<Metric> metrics;
  std::vector<std::string> explainers;
  std::map<std::pair<Metric, std::string>, std::map<std::string, double>> scores;
};

Table tabulate(std::span<const ScoreRow> rows) {
  Table t;
  for (const auto& r : rows) {
    if (std::find(t.metrics.begin(), t.metrics.end(), r.metric) == t.metrics.end()) {
      t.metrics.push_back(r.metric);
    }
    if (std::find(t.explainers.begin(), t.explainers.end(), r.explainer) == t.explainers.end()) {
      t.explainers.push_back(r.explainer);
    }
    t.scores[{r.metric, r.explainer}][r.image_id] = r.score;
  }
  std::sort(t.metrics.begin(), t.metrics.end());
  // Random last.
  const auto random = std::find(t.explainers.begin(), t.explainers.end(), "random");
  if (random != t.explainers.end()) std::rotate(random, random + 1, t.explainers.end());
  return t;
}

double mean_of(const std::map<std::string, double>& scores) {
  if (scores.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [id, s] : scores) total += s;
  return total / static_cast<double>(scores.size());
}

SignificanceRow compare(const Table& t, Metric m, const std::string& a, const std::string& b) {
  SignificanceRow row{m, a, b, 0.0, 0.0, std::nullopt};
  const auto ia = t.scores.find({m, a});
  const auto ib = t.scores.find({m, b});
  if (ia == t.scores.end() || ib == t.scores.end()) return row;
  std::vector<double> xa, xb;
  for (const auto& [id, s] : ia->second) {
    if (const auto it = ib->second.find(id); it != ib->second.end()) {
      xa.push_back(s);
      xb.push_back(it->second);
    }
  }
  if (xa.empty()) return row;
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < xa.size(); ++i) {
    sa += xa[i];
    sb += xb[i];
  }
  row.mean_a = sa / static_cast<double>(xa.size());
  row.mean_b = sb / static_cast<double>(xb.size());
  if (xa.size() >= 2) row.test = paired_t_test(xa, xb);
  return row;
}

std::string join_members(const std::vector<std::size_t>& members) {
  return fmt::format("{}", fmt::join(members, "+"));
}

}  // namespace

std::string format_score(double score) { return fixed(score, 6); }

void write_metrics_csv(std::ostream& out, std::span<const ScoreRow> rows) {
  out << "image-id,metric,explainer,query,score\n";
  for (const auto& r : rows) {
    out << r.image_id << ',' << to_string(r.metric) << ',' << r.explainer << ',' << r.query << ','
        << format_score(r.score) << '\n';
  }
}

std::vector<ScoreRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "image-id,metric,explainer,query,score") {
    throw FormatError("metrics.csv lacks its header line");
  }
  std::vector<ScoreRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw FormatError(fmt::format("metrics.csv line {}: expected 5 fields", lineno));
    ScoreRow r;
    r.image_id = f[0];
    try {
      r.metric = parse_metric(f[1]);
    } catch (const InvalidArgument& e) {
      throw FormatError(fmt::format("metrics.csv line {}: {}", lineno, e.what()));
    }
    r.explainer = f[2];
    r.query = f[3];
    const auto* end = f[4].data() + f[4].size();
    const auto [ptr, ec] = std::from_chars(f[4].data(), end, r.score);
    if (ec != std::errc() || ptr != end) {
      throw FormatError(fmt::format("metrics.csv line {}: bad score '{}'", lineno, f[4]));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SignificanceRow> compute_significance(std::span<const ScoreRow> rows) {
  const Table t = tabulate(rows);
  std::vector<SignificanceRow> out;
  const bool has_random =
      std::find(t.explainers.begin(), t.explainers.end(), "random") != t.explainers.end();
  for (Metric m : t.metrics) {
    if (has_random) {
      for (const auto& e : t.explainers) out.push_back(compare(t, m, e, "random"));
    }
    for (std::size_t i = 0; i < t.explainers.size(); ++i) {
      if (t.explainers[i] == "random") continue;
      for (std::size_t j = i + 1; j < t.explainers.size(); ++j) {
        if (t.explainers[j] == "random") continue;
        out.push_back(compare(t, m, t.explainers[i], t.explainers[j]));
      }
    }
  }
  return out;
}

std::string format_significance_csv(std::span<const SignificanceRow> rows) {
  std::string out = "metric,explainer_a,explainer_b,n,mean_a,mean_b,mean_diff,t,p\n";
  for (const auto& r : rows) {
    if (r.test) {
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", to_string(r.metric), r.explainer_a,
                         r.explainer_b, r.test->n, fixed(r.mean_a, 6), fixed(r.mean_b, 6),
                         fixed(r.test->mean_difference, 6), format_t(*r.test),
                         format_p_value(*r.test));
    } else {
      out += fmt::format("{},{},{},0,{},{},,,\n", to_string(r.metric), r.explainer_a,
                         r.explainer_b, fixed(r.mean_a, 6), fixed(r.mean_b, 6));
    }
  }
  return out;
}

std::string format_summary(std::span<const ScoreRow> rows) {
  const Table t = tabulate(rows);
  std::vector<std::string> images;
  for (const auto& r : rows) images.push_back(r.image_id);
  std::sort(images.begin(), images.end());
  images.erase(std::unique(images.begin(), images.end()), images.end());

  std::string out = "# Evaluation summary\n\n";
  out += fmt::format("Images scored: {}\n\n", images.size());
  if (rows.empty()) {
    out += "No scores were recorded.\n";
    return out;
  }
  out += "## Mean scores\n\n";
  out += "Scores are 100 x AUC over the perturbation schedule. Deletion is lower-is-better; "
         "all other metrics are higher-is-better.\n\n";
  out += fmt::format("| metric | {} |\n", fmt::join(t.explainers, " | "));
  out += "|---";
  for (std::size_t i = 0; i < t.explainers.size(); ++i) out += "|---:";
  out += "|\n";
  for (Metric m : t.metrics) {
    out += fmt::format("| {} |", to_string(m));
    for (const auto& e : t.explainers) {
      const auto it = t.scores.find({m, e});
      out += it == t.scores.end() ? std::string(" - |") : fmt::format(" {} |", fixed(mean_of(it->second), 3));
    }
    out += "\n";
  }

  const auto sig = compute_significance(rows);
  const bool any_random = std::any_of(sig.begin(), sig.end(),
                                      [](const auto& r) { return r.explainer_b == "random"; });
  if (any_random) {
    out += "\n## Against the random baseline\n\n";
    out += "Paired two-sided t-tests over the images both maps were scored on; "
           "\"better\" means p < 0.05 in the metric's preferred direction.\n\n";
    out += "| metric | explainer | n | mean | random | diff | t | p | better |\n";
    out += "|---|---|---:|---:|---:|---:|---:|---:|---|\n";
    for (const auto& r : sig) {
      if (r.explainer_b != "random") continue;
      if (!r.test) {
        out += fmt::format("| {} | {} | 0 | {} | {} | - | - | - | no |\n", to_string(r.metric),
                           r.explainer_a, fixed(r.mean_a, 3), fixed(r.mean_b, 3));
        continue;
      }
      const double d = r.test->mean_difference;
      const bool better = r.test->p < 0.05 && (r.metric == Metric::kDeletion ? d < 0 : d > 0);
      out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n", to_string(r.metric),
                         r.explainer_a, r.test->n, fixed(r.mean_a, 3), fixed(r.mean_b, 3),
                         fixed(d, 3), format_t(*r.test), format_p_value(*r.test),
                         better ? "yes" : "no");
    }
  }
  return out;
}

void write_report(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                  const RunInputs& inputs, const ReportBundle& bundle) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ostringstream csv;
    write_metrics_csv(csv, bundle.rows);
    write_file(dir / "metrics.csv", csv.str());
  }
  write_file(dir / "summary.md", format_summary(bundle.rows));
  write_file(dir / "significance.csv", format_significance_csv(compute_significance(bundle.rows)));
  write_file(dir / "groups.tsv", format_group_table(inputs.groups));
  write_file(dir / "config.txt", format_config(cfg, false));

  std::string selections = "image-id\tlabel\tclass_a\tclass_b\tgroup_a\tcontrast\tgroup_b\n";
  std::string probs = "image-id";
  for (std::size_t c = 0; c < inputs.groups.class_count(); ++c) probs += fmt::format("\tp{}", c);
  probs += "\n";
  std::string skipped = "image-id\tstatus\treason\n";
  for (const auto& rec : bundle.images) {
    if (rec.selection) {
      const auto& s = *rec.selection;
      selections += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", rec.image_id, rec.label, s.class_a,
                                s.class_b, join_members(s.group_a), join_members(s.contrast),
                                join_members(s.group_b));
    }
    if (!rec.probs.empty()) {
      probs += rec.image_id;
      for (double p : rec.probs) probs += fmt::format("\t{:.9f}", p);
      probs += "\n";
    }
    if (rec.status != ImageStatus::kProcessed) {
      std::string reason = rec.reason;
      std::replace(reason.begin(), reason.end(), '\t', ' ');
      std::replace(reason.begin(), reason.end(), '\n', ' ');
      skipped += fmt::format("{}\t{}\t{}\n", rec.image_id,
                             rec.status == ImageStatus::kSkipped ? "skipped" : "failed", reason);
    }
  }
  write_file(dir / "selections.tsv", selections);
  write_file(dir / "probs.tsv", probs);
  write_file(dir / "skipped.tsv", skipped);

  std::string run = "key\tvalue\n";
  run += fmt::format("images\t{}\n", bundle.images.size());
  run += fmt::format("processed\t{}\n", bundle.processed);
  run += fmt::format("skipped\t{}\n", bundle.skipped + bundle.failed);
  run += fmt::format("failed\t{}\n", bundle.failed);
  run += fmt::format("rows\t{}\n", bundle.rows.size());
  if (inputs.validation_accuracy) {
    run += fmt::format("validation_accuracy\t{}\n", fixed(*inputs.validation_accuracy, 6));
  }
  run += fmt::format("exit_code\t{}\n", bundle.exit_code());
  write_file(dir / "run.tsv", run);

  if (inputs.trained) {
    std::string log = "epoch\tmean_loss\ttrain_accuracy\tvalidation_accuracy\n";
    for (const auto& e : inputs.training) {
      log += fmt::format("{}\t{}\t{}\t{}\n", e.epoch, fixed(e.mean_loss, 6), fixed(e.train_accuracy, 6),
                         e.validation_accuracy ? fixed(*e.validation_accuracy, 6) : "");
    }
    write_file(dir / "training.tsv", log);
    save_checkpoint(dir / "model.ckpt", *inputs.trained);
  }

  if (cfg.dump_curves) {
    fs::create_directories(dir / "curves");
    for (const auto& r : bundle.rows) {
      std::string text = "alpha,score\n";
      for (std::size_t k = 0; k < r.curve.alphas.size(); ++k) {
        text += fmt::format("{},{}\n", fixed(r.curve.alphas[k], 4), fixed(r.curve.scores[k], 9));
      }
      write_file(dir / "curves" / fmt::format("{}_{}_{}.csv", r.image_id, to_string(r.metric), r.explainer),
                 text);
    }
  }

  if (cfg.overlays > 0) {
    fs::create_directories(dir / "overlays");
    const ExplainerSettings settings = cfg.explainer_settings();
    std::size_t written = 0;
    for (std::size_t i = 0; i < bundle.images.size() && written < cfg.overlays; ++i) {
      const auto& rec = bundle.images[i];
      if (rec.status != ImageStatus::kProcessed) continue;
      ++written;
      const ImageTensor& image = inputs.images[i].image;
      save_pnm(dir / "overlays" / fmt::format("{}_input.ppm", rec.image_id), image);
      const auto queries = case_queries(*rec.selection, bundle.metrics);
      for (const auto& name : bundle.explainers) {
        if (name == "random") continue;
        const auto maps = generate_case_maps(parse_explainer(name), *inputs.scorer, image, queries,
                                             settings, 0);
        for (std::size_t q = 0; q < queries.size(); ++q) {
          save_pnm(dir / "overlays" /
                       fmt::format("{}_{}_{}.ppm", rec.image_id, name, query_kind(queries[q].query)),
                   render_overlay(image, maps.maps[q]));
        }
      }
    }
  }
}

void regenerate_report(const std::filesystem::path& dir) {
  std::ifstream in(dir / "metrics.csv");
  if (!in) throw InvalidArgument(fmt::format("cannot open {}", (dir / "metrics.csv").string()));
  const auto rows = read_metrics_csv(in);
  write_file(dir / "summary.md", format_summary(rows));
  write_file(dir / "significance.csv", format_significance_csv(compute_significance(rows)));
}

}  // namespace rfxg
