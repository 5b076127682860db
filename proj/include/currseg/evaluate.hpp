#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "currseg/curriculum.hpp"
#include "currseg/dataset.hpp"

namespace currseg {

// One CSV row: per-image, per-stage metrics. stage is "1", "2", ... or
// "final". A failed image carries a single zero-score "final" row with the
// error in error_note - a missed detection is a scored miss, never an abort.
struct PerImageRow {
  std::string id;
  std::string scenario;
  std::string stage;
  double dice = 0.0;
  double iou = 0.0;
  std::string error_note;
};

struct ScenarioSummary {
  std::string scenario;
  double mean_dice = 0.0;
  double mean_iou = 0.0;
  std::size_t images = 0;
};

struct EvalReport {
  std::vector<PerImageRow> rows;
  std::vector<ScenarioSummary> means;
  std::string config_fingerprint;
  double wall_seconds = 0.0;
};

struct EvalOptions {
  int jobs = 1;
  std::string config_fingerprint;
  PromptGenerators generators;
  // One backend per worker thread; defaults to the built-in random walker.
  std::function<std::unique_ptr<Segmenter>()> make_backend =
      [] { return std::unique_ptr<Segmenter>(new BuiltinSegmenter()); };
};

namespace detail {

// Evaluates one scenario over the dataset with a tag for the report. Images
// are processed by an index-claiming worker pool and the rows assembled in
// dataset order, so the report does not depend on scheduling.
inline void evaluate_into(EvalReport& report, const Dataset& dataset,
                          const CurriculumConfig& cfg, Scenario scenario,
                          const std::string& tag, const EvalOptions& options) {
  const std::size_t n = dataset.entries.size();
  std::vector<std::vector<PerImageRow>> rows_by_image(n);

  const int jobs =
      std::max(1, std::min<int>(options.jobs, static_cast<int>(n ? n : 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    std::unique_ptr<Segmenter> backend = options.make_backend();
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      const DatasetEntry& entry = dataset.entries[i];
      std::vector<PerImageRow>& rows = rows_by_image[i];
      try {
        const Image image = load_image_png(entry.image_path);
        const BinaryMask gt = load_mask_png(entry.mask_path);
        // Sidecar discovery: <stem>.boxes.json / <stem>.points.json next to
        // the image feed the external box method and the point-sourced
        // scenarios, unless the caller pinned explicit values.
        CurriculumConfig image_cfg = cfg;
        if (image_cfg.box_cfg.method == BoxProposerConfig::Method::ExternalJson &&
            image_cfg.box_cfg.external_path.empty())
          image_cfg.box_cfg.external_path = sidecar_path(entry.image_path, "boxes");
        PromptGenerators generators = options.generators;
        if (!generators.fixed_points) {
          const auto points_sidecar = sidecar_path(entry.image_path, "points");
          if (std::filesystem::exists(points_sidecar))
            generators.fixed_points = load_points_json(points_sidecar, image.width,
                                                       image.height, true);
        }
        const PipelineResult result = run_scenario(
            image, scenario, image_cfg, *backend, generators, &gt);
        for (const StageTrace& stage : result.stages) {
          PerImageRow row;
          row.id = entry.id;
          row.scenario = tag;
          row.stage = std::to_string(stage.stage_index);
          if (stage.metrics_vs_gt) {
            row.dice = stage.metrics_vs_gt->dice;
            row.iou = stage.metrics_vs_gt->iou;
          }
          row.error_note = stage.note;
          rows.push_back(std::move(row));
        }
        PerImageRow final_row;
        final_row.id = entry.id;
        final_row.scenario = tag;
        final_row.stage = "final";
        const MetricsRecord m = metrics(result.final.binary, gt);
        final_row.dice = m.dice;
        final_row.iou = m.iou;
        if (result.empty_detection)
          final_row.error_note = "empty detection: no boxes proposed";
        rows.push_back(std::move(final_row));
      } catch (const std::exception& e) {
        PerImageRow row;
        row.id = entry.id;
        row.scenario = tag;
        row.stage = "final";
        row.error_note = e.what();
        rows.assign(1, std::move(row));
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ScenarioSummary summary;
  summary.scenario = tag;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& row : rows_by_image[i]) {
      if (row.stage == "final") {
        summary.mean_dice += row.dice;
        summary.mean_iou += row.iou;
        ++summary.images;
      }
      report.rows.push_back(std::move(row));
    }
  }
  if (summary.images > 0) {
    summary.mean_dice /= static_cast<double>(summary.images);
    summary.mean_iou /= static_cast<double>(summary.images);
  }
  report.means.push_back(summary);
}

}  // namespace detail

// Runs one scenario over a dataset and aggregates mean Dice / IoU.
inline EvalReport evaluate(const Dataset& dataset, const CurriculumConfig& cfg,
                           Scenario scenario, const EvalOptions& options = {}) {
  if (dataset.entries.empty()) throw DataError("evaluate: dataset is empty");
  cfg.validate();
  EvalReport report;
  report.config_fingerprint = options.config_fingerprint;
  const auto t0 = std::chrono::steady_clock::now();
  detail::evaluate_into(report, dataset, cfg, scenario, scenario_name(scenario),
                        options);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// All five prompt-combination scenarios, one report. Each scenario block is
// computed exactly as a standalone evaluate() call would.
inline EvalReport ablation_run(const Dataset& dataset,
                               const CurriculumConfig& cfg,
                               const EvalOptions& options = {}) {
  if (dataset.entries.empty()) throw DataError("ablation_run: dataset is empty");
  cfg.validate();
  EvalReport report;
  report.config_fingerprint = options.config_fingerprint;
  const auto t0 = std::chrono::steady_clock::now();
  for (Scenario s : {Scenario::PointOnly, Scenario::BoxOnly, Scenario::BoxPlusMask,
                     Scenario::PointPlusBoxSimultaneous, Scenario::FullCurriculum})
    detail::evaluate_into(report, dataset, cfg, s, scenario_name(s), options);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// Full curriculum with edge points labeled negative (0) then positive (1).
// No direction is asserted; the two rows let the polarity choice be read off.
inline EvalReport polarity_experiment(const Dataset& dataset,
                                      const CurriculumConfig& cfg,
                                      const EvalOptions& options = {}) {
  if (dataset.entries.empty())
    throw DataError("polarity_experiment: dataset is empty");
  cfg.validate();
  EvalReport report;
  report.config_fingerprint = options.config_fingerprint;
  const auto t0 = std::chrono::steady_clock::now();
  for (int label : {0, 1}) {
    CurriculumConfig variant = cfg;
    variant.point_cfg.label = label;
    const std::string tag = std::string("full-curriculum/") +
                            (label == 0 ? "negative(0)" : "positive(1)");
    detail::evaluate_into(report, dataset, variant, Scenario::FullCurriculum, tag,
                          options);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace currseg
