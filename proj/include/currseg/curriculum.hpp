#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "currseg/metrics.hpp"
#include "currseg/promptgen.hpp"
#include "currseg/segmenter.hpp"

namespace currseg {

// The coarse-to-fine schedule. Stage 1 segments from self-generated boxes;
// every later stage feeds the previous mask back as a dense prior together
// with fresh edge points sampled on its boundary. Two stages is the default;
// more stages repeat the refinement wiring.
struct CurriculumConfig {
  enum class EmptyBoxPolicy { ReturnEmpty, WholeImageBox };

  int steps = 2;
  StageProfile coarse = coarse_profile();
  StageProfile fine = fine_profile();
  BoxProposerConfig box_cfg;
  EdgePointConfig point_cfg;
  bool per_box_segmentation = true;
  EmptyBoxPolicy empty_box_policy = EmptyBoxPolicy::ReturnEmpty;

  void validate() const {
    if (steps < 1) throw ConfigError("CurriculumConfig: steps must be >= 1");
    coarse.validate();
    fine.validate();
    box_cfg.validate();
    point_cfg.validate();
  }
};

// Audit record of one executed stage.
struct StageTrace {
  int stage_index = 0;  // 1-based
  PromptBundle prompts_used;
  SegmentationResult result;
  std::optional<MetricsRecord> metrics_vs_gt;
  std::string note;  // nonempty only for flagged stages (e.g. empty detection)
};

struct PipelineResult {
  SegmentationResult final;
  std::vector<StageTrace> stages;
  bool empty_detection = false;
};

// The five prompt-combination scenarios of the ablation study.
enum class Scenario {
  PointOnly,
  BoxOnly,
  BoxPlusMask,
  PointPlusBoxSimultaneous,
  FullCurriculum,
};

inline const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::PointOnly: return "point-only";
    case Scenario::BoxOnly: return "box-only";
    case Scenario::BoxPlusMask: return "box-plus-mask";
    case Scenario::PointPlusBoxSimultaneous: return "point-plus-box-simultaneous";
    case Scenario::FullCurriculum: return "full-curriculum";
  }
  return "?";
}

inline Scenario parse_scenario(const std::string& name) {
  for (Scenario s : {Scenario::PointOnly, Scenario::BoxOnly, Scenario::BoxPlusMask,
                     Scenario::PointPlusBoxSimultaneous, Scenario::FullCurriculum})
    if (name == scenario_name(s)) return s;
  throw ConfigError(
      "unknown scenario \"" + name +
      "\"; valid: point-only, box-only, box-plus-mask, "
      "point-plus-box-simultaneous, full-curriculum");
}

// Injection points for the prompt generators, so tests and the CLI can swap
// in stubs or sidecar-sourced prompts. Defaults route to the builtins.
struct PromptGenerators {
  std::function<std::vector<BoxPrompt>(const Image&, const BoxProposerConfig&)>
      boxes = [](const Image& img, const BoxProposerConfig& c) {
        return propose_boxes(img, c);
      };
  std::function<std::vector<PointPrompt>(const BinaryMask&, const Image&,
                                         const EdgePointConfig&)>
      edge_points = [](const BinaryMask& m, const Image& img,
                       const EdgePointConfig& c) {
        return sample_edge_points(m, img, c);
      };
  // Replaces ground-truth-derived points in the point-only and
  // point-plus-box scenarios (e.g. loaded from a sidecar file).
  std::optional<std::vector<PointPrompt>> fixed_points;
};

namespace detail {

inline SegmentationResult empty_result(int width, int height) {
  SegmentationResult r;
  r.soft = SoftMask(width, height, 0.0);
  r.binary = BinaryMask(width, height, false);
  return r;
}

inline MetricsRecord metrics_or_throw(const SegmentationResult& r,
                                      const BinaryMask& gt) {
  return metrics(r.binary, gt);
}

struct StageOne {
  std::vector<BoxPrompt> boxes;
  PromptBundle bundle;
  SegmentationResult result;
  bool empty_detection = false;
  std::string note;
};

// Box proposal, NMS and the coarse segmentation. Multi-box images segment
// per box and merge: soft masks by pixelwise max, so the union binary equals
// the thresholded merged soft.
inline StageOne run_stage_one(const Image& image, const CurriculumConfig& cfg,
                              Segmenter& backend,
                              const PromptGenerators& generators) {
  StageOne out;
  out.boxes = nms(generators.boxes(image, cfg.box_cfg), cfg.box_cfg.nms_iou);

  if (out.boxes.empty()) {
    if (cfg.empty_box_policy == CurriculumConfig::EmptyBoxPolicy::ReturnEmpty) {
      out.result = empty_result(image.width, image.height);
      out.empty_detection = true;
      out.note = "empty detection: no boxes proposed";
      return out;
    }
    BoxPrompt whole;
    whole.x1 = 0;
    whole.y1 = 0;
    whole.x2 = image.width;
    whole.y2 = image.height;
    whole.score = 1.0;
    out.boxes.push_back(whole);
  }

  out.bundle.boxes = out.boxes;
  if (cfg.per_box_segmentation && out.boxes.size() > 1) {
    SegmentationResult merged;
    for (std::size_t i = 0; i < out.boxes.size(); ++i) {
      PromptBundle single;
      single.boxes.push_back(out.boxes[i]);
      SegmentationResult r = backend.segment(single, cfg.coarse);
      if (i == 0) {
        merged = std::move(r);
      } else {
        for (std::size_t p = 0; p < merged.soft.values.size(); ++p)
          merged.soft.values[p] = std::max(merged.soft.values[p], r.soft.values[p]);
        merged.solver_iters += r.solver_iters;
        merged.solver_residual = std::max(merged.solver_residual, r.solver_residual);
        merged.converged = merged.converged && r.converged;
      }
    }
    merged.binary = threshold(merged.soft, cfg.coarse.threshold);
    out.result = std::move(merged);
  } else {
    out.result = backend.segment(out.bundle, cfg.coarse);
  }
  return out;
}

}  // namespace detail

// Runs the n-step curriculum on one image. Stage 1: self-generated boxes to
// a coarse mask. Stage k >= 2: edge points sampled on the previous binary
// plus the previous soft mask as a dense prior, under the fine profile.
// Backend errors propagate with the stage index attached.
inline PipelineResult run(const Image& image, const CurriculumConfig& cfg,
                          Segmenter& backend,
                          const PromptGenerators& generators = {},
                          const BinaryMask* gt = nullptr) {
  cfg.validate();
  backend.set_image(image);

  PipelineResult pipeline;
  try {
    detail::StageOne s1 = detail::run_stage_one(image, cfg, backend, generators);
    StageTrace trace;
    trace.stage_index = 1;
    trace.prompts_used = s1.bundle;
    trace.result = s1.result;
    trace.note = s1.note;
    if (gt) trace.metrics_vs_gt = detail::metrics_or_throw(s1.result, *gt);
    pipeline.stages.push_back(std::move(trace));
    pipeline.empty_detection = s1.empty_detection;
    if (s1.empty_detection) {
      pipeline.final = pipeline.stages.back().result;
      return pipeline;
    }
  } catch (const Error& e) {
    throw Error("stage 1: " + std::string(e.what()));
  }

  for (int stage = 2; stage <= cfg.steps; ++stage) {
    try {
      const SegmentationResult& prev = pipeline.stages.back().result;
      PromptBundle bundle;
      bundle.points = generators.edge_points(prev.binary, image, cfg.point_cfg);
      bundle.dense_prior = prev.soft;
      StageTrace trace;
      trace.stage_index = stage;
      trace.result = backend.segment(bundle, cfg.fine);
      trace.prompts_used = std::move(bundle);
      if (gt) trace.metrics_vs_gt = detail::metrics_or_throw(trace.result, *gt);
      pipeline.stages.push_back(std::move(trace));
    } catch (const Error& e) {
      throw Error("stage " + std::to_string(stage) + ": " + std::string(e.what()));
    }
  }

  pipeline.final = pipeline.stages.back().result;
  return pipeline;
}

// Ablation wiring. box-only and full-curriculum are literally run() with
// n = 1 and n = 2, so their outputs are bit-identical to the pipeline's.
// The point-sourced scenarios draw edge points from the ground-truth contour
// (or generators.fixed_points when supplied, e.g. from a sidecar).
inline PipelineResult run_scenario(const Image& image, Scenario scenario,
                                   const CurriculumConfig& cfg,
                                   Segmenter& backend,
                                   const PromptGenerators& generators = {},
                                   const BinaryMask* gt = nullptr) {
  cfg.validate();

  auto gt_or_sidecar_points = [&]() -> std::vector<PointPrompt> {
    if (generators.fixed_points) return *generators.fixed_points;
    if (!gt)
      throw Error(std::string(scenario_name(scenario)) +
                  " scenario requires ground truth or sidecar points");
    return generators.edge_points(*gt, image, cfg.point_cfg);
  };

  switch (scenario) {
    case Scenario::BoxOnly: {
      CurriculumConfig one = cfg;
      one.steps = 1;
      return run(image, one, backend, generators, gt);
    }
    case Scenario::FullCurriculum: {
      CurriculumConfig two = cfg;
      two.steps = 2;
      return run(image, two, backend, generators, gt);
    }
    case Scenario::PointOnly: {
      const std::vector<PointPrompt> points = gt_or_sidecar_points();
      backend.set_image(image);
      PromptBundle bundle;
      bundle.points = points;
      PipelineResult pipeline;
      StageTrace trace;
      trace.stage_index = 1;
      trace.result = backend.segment(bundle, cfg.fine);
      trace.prompts_used = std::move(bundle);
      if (gt) trace.metrics_vs_gt = metrics(trace.result.binary, *gt);
      pipeline.stages.push_back(std::move(trace));
      pipeline.final = pipeline.stages.back().result;
      return pipeline;
    }
    case Scenario::BoxPlusMask: {
      backend.set_image(image);
      PipelineResult pipeline;
      detail::StageOne s1;
      try {
        s1 = detail::run_stage_one(image, cfg, backend, generators);
      } catch (const Error& e) {
        throw Error("stage 1: " + std::string(e.what()));
      }
      StageTrace trace;
      trace.stage_index = 1;
      trace.prompts_used = s1.bundle;
      trace.result = s1.result;
      trace.note = s1.note;
      if (gt) trace.metrics_vs_gt = metrics(s1.result.binary, *gt);
      pipeline.stages.push_back(std::move(trace));
      pipeline.empty_detection = s1.empty_detection;
      if (s1.empty_detection) {
        pipeline.final = pipeline.stages.back().result;
        return pipeline;
      }
      try {
        PromptBundle bundle;
        bundle.boxes = s1.boxes;
        bundle.dense_prior = s1.result.soft;  // the mask prompt, no points
        StageTrace second;
        second.stage_index = 2;
        second.result = backend.segment(bundle, cfg.fine);
        second.prompts_used = std::move(bundle);
        if (gt) second.metrics_vs_gt = metrics(second.result.binary, *gt);
        pipeline.stages.push_back(std::move(second));
      } catch (const Error& e) {
        throw Error("stage 2: " + std::string(e.what()));
      }
      pipeline.final = pipeline.stages.back().result;
      return pipeline;
    }
    case Scenario::PointPlusBoxSimultaneous: {
      const std::vector<PointPrompt> points = gt_or_sidecar_points();
      backend.set_image(image);
      PipelineResult pipeline;
      std::vector<BoxPrompt> boxes =
          nms(generators.boxes(image, cfg.box_cfg), cfg.box_cfg.nms_iou);
      if (boxes.empty() &&
          cfg.empty_box_policy == CurriculumConfig::EmptyBoxPolicy::ReturnEmpty) {
        StageTrace trace;
        trace.stage_index = 1;
        trace.result = detail::empty_result(image.width, image.height);
        trace.note = "empty detection: no boxes proposed";
        if (gt) trace.metrics_vs_gt = metrics(trace.result.binary, *gt);
        pipeline.stages.push_back(std::move(trace));
        pipeline.empty_detection = true;
        pipeline.final = pipeline.stages.back().result;
        return pipeline;
      }
      if (boxes.empty()) {
        BoxPrompt whole;
        whole.x2 = image.width;
        whole.y2 = image.height;
        boxes.push_back(whole);
      }
      // Both sparse channels in one call: the conflict case of the ablation.
      PromptBundle bundle;
      bundle.boxes = std::move(boxes);
      bundle.points = points;
      StageTrace trace;
      trace.stage_index = 1;
      trace.result = backend.segment(bundle, cfg.coarse);
      trace.prompts_used = std::move(bundle);
      if (gt) trace.metrics_vs_gt = metrics(trace.result.binary, *gt);
      pipeline.stages.push_back(std::move(trace));
      pipeline.final = pipeline.stages.back().result;
      return pipeline;
    }
  }
  throw Error("unreachable scenario");
}

}  // namespace currseg
