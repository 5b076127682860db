// currseg - curriculum prompting for promptable image segmentation.
//
// Subcommands:
//   synth   generate a synthetic benchmark split
//   run     run the box -> coarse mask -> edge points + prior curriculum on one image
//   eval    evaluate one scenario over a dataset split
//   ablate  run the five-scenario prompt ablation
//   viz     render a stage overlay from a saved trace
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 runtime error.
// Environment overrides: CURRSEG_CONFIG, CURRSEG_SEED, CURRSEG_JOBS, CURRSEG_OUT.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "currseg/currseg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out;
};

currseg::AppConfig resolve_config(const GlobalArgs& args) {
  currseg::AppConfig cfg;
  std::string path = args.config_path;
  if (path.empty())
    if (const char* env = std::getenv("CURRSEG_CONFIG")) path = env;
  if (!path.empty()) cfg = currseg::load_config(path);
  currseg::apply_env_overrides(cfg);
  if (args.seed) cfg.seed = cfg.synthetic.rng_seed = *args.seed;
  if (args.jobs) cfg.jobs = *args.jobs;
  if (args.out) cfg.out_dir = *args.out;
  cfg.validate();
  return cfg;
}

std::unique_ptr<currseg::Segmenter> make_backend(const currseg::AppConfig& cfg) {
  if (cfg.backend == currseg::AppConfig::BackendKind::External)
    return std::make_unique<currseg::ExternalSegmenter>(cfg.adapter);
  return std::make_unique<currseg::BuiltinSegmenter>();
}

currseg::EvalOptions eval_options(const currseg::AppConfig& cfg) {
  currseg::EvalOptions options;
  options.jobs = cfg.jobs;
  options.config_fingerprint = currseg::config_fingerprint(cfg);
  options.make_backend = [cfg] { return make_backend(cfg); };
  return options;
}

void print_means(const currseg::EvalReport& report) {
  std::printf("%-38s %10s %10s %8s\n", "scenario", "mDice", "mIoU", "images");
  for (const auto& m : report.means)
    std::printf("%-38s %10.5f %10.5f %8zu\n", m.scenario.c_str(), m.mean_dice,
                m.mean_iou, m.images);
}

int cmd_synth(const GlobalArgs& args, int count) {
  const currseg::AppConfig cfg = resolve_config(args);
  const currseg::Dataset dataset =
      currseg::generate_synthetic(cfg.synthetic, count, cfg.out_dir);
  currseg::write_effective_config(cfg, cfg.out_dir);
  std::printf("generated %zu image/mask pairs under %s\n", dataset.entries.size(),
              cfg.out_dir.string().c_str());
  if (dataset.entries.empty()) std::printf("(empty dataset)\n");
  return 0;
}

json box_json(const currseg::BoxPrompt& b) {
  return json{{"x1", b.x1}, {"y1", b.y1}, {"x2", b.x2}, {"y2", b.y2},
              {"score", b.score}};
}

json point_json(const currseg::PointPrompt& p) {
  return json{{"x", p.x}, {"y", p.y}, {"label", p.label}};
}

int cmd_run(const GlobalArgs& args, const std::string& image_path,
            const std::string& gt_path) {
  const currseg::AppConfig cfg = resolve_config(args);
  if (!fs::exists(image_path))
    throw currseg::DataError("image not found: " + image_path);
  const currseg::Image image = currseg::load_image_png(image_path);

  std::optional<currseg::BinaryMask> gt;
  if (!gt_path.empty()) {
    if (!fs::exists(gt_path))
      throw currseg::DataError("ground-truth mask not found: " + gt_path);
    gt = currseg::load_mask_png(gt_path);
  }

  currseg::CurriculumConfig run_cfg = cfg.curriculum;
  if (run_cfg.box_cfg.method == currseg::BoxProposerConfig::Method::ExternalJson &&
      run_cfg.box_cfg.external_path.empty())
    run_cfg.box_cfg.external_path = currseg::sidecar_path(image_path, "boxes");
  currseg::PromptGenerators generators;
  const auto points_sidecar = currseg::sidecar_path(image_path, "points");
  if (fs::exists(points_sidecar))
    generators.fixed_points = currseg::load_points_json(points_sidecar, image.width,
                                                        image.height, true);

  auto backend = make_backend(cfg);
  const currseg::PipelineResult result = currseg::run(
      image, run_cfg, *backend, generators, gt ? &*gt : nullptr);

  fs::create_directories(cfg.out_dir);
  currseg::write_effective_config(cfg, cfg.out_dir);
  currseg::save_mask_png(cfg.out_dir / "final_mask.png", result.final.binary);

  json trace;
  trace["image"] = fs::absolute(image_path).string();
  trace["stages"] = json::array();
  for (const auto& stage : result.stages) {
    char binary_name[32], soft_name[32];
    std::snprintf(binary_name, sizeof(binary_name), "stage_%d_binary.png",
                  stage.stage_index);
    std::snprintf(soft_name, sizeof(soft_name), "stage_%d_soft.png",
                  stage.stage_index);
    currseg::save_mask_png(cfg.out_dir / binary_name, stage.result.binary);
    currseg::save_soft_png(cfg.out_dir / soft_name, stage.result.soft);
    json entry;
    entry["stage_index"] = stage.stage_index;
    entry["binary_mask"] = binary_name;
    entry["soft_mask"] = soft_name;
    entry["boxes"] = json::array();
    for (const auto& b : stage.prompts_used.boxes) entry["boxes"].push_back(box_json(b));
    entry["points"] = json::array();
    for (const auto& p : stage.prompts_used.points)
      entry["points"].push_back(point_json(p));
    entry["solver_iters"] = stage.result.solver_iters;
    entry["solver_residual"] = stage.result.solver_residual;
    entry["converged"] = stage.result.converged;
    entry["note"] = stage.note;
    if (stage.metrics_vs_gt) {
      entry["dice"] = stage.metrics_vs_gt->dice;
      entry["iou"] = stage.metrics_vs_gt->iou;
    }
    trace["stages"].push_back(std::move(entry));
  }
  {
    std::ofstream f(cfg.out_dir / "trace.json", std::ios::trunc);
    f << trace.dump(2) << "\n";
    if (!f) throw currseg::DataError("cannot write trace.json");
  }
  currseg::render_overlay(image, result.stages, cfg.out_dir / "overlay.png",
                          gt ? &*gt : nullptr);

  for (const auto& stage : result.stages) {
    if (stage.metrics_vs_gt)
      std::printf("stage %d: dice=%.5f iou=%.5f\n", stage.stage_index,
                  stage.metrics_vs_gt->dice, stage.metrics_vs_gt->iou);
    else
      std::printf("stage %d: done (%d solver iters)\n", stage.stage_index,
                  stage.result.solver_iters);
    if (!stage.note.empty())
      std::printf("stage %d: %s\n", stage.stage_index, stage.note.c_str());
  }
  std::printf("artifacts written to %s\n", cfg.out_dir.string().c_str());
  return 0;
}

int cmd_eval(const GlobalArgs& args, const std::string& data_root,
             const std::string& split, const std::string& scenario_str) {
  const currseg::AppConfig cfg = resolve_config(args);
  const currseg::Scenario scenario = currseg::parse_scenario(scenario_str);
  const currseg::Dataset dataset = currseg::load_dataset(data_root, split);
  const currseg::EvalReport report =
      currseg::evaluate(dataset, cfg.curriculum, scenario, eval_options(cfg));
  currseg::write_effective_config(cfg, cfg.out_dir);
  currseg::emit_report(report, cfg.out_dir);
  print_means(report);
  std::printf("report written to %s (%.1fs)\n", cfg.out_dir.string().c_str(),
              report.wall_seconds);
  return 0;
}

int cmd_ablate(const GlobalArgs& args, const std::string& data_root,
               const std::string& split) {
  const currseg::AppConfig cfg = resolve_config(args);
  const currseg::Dataset dataset = currseg::load_dataset(data_root, split);
  const currseg::EvalReport report =
      currseg::ablation_run(dataset, cfg.curriculum, eval_options(cfg));
  currseg::write_effective_config(cfg, cfg.out_dir);
  currseg::emit_report(report, cfg.out_dir);
  print_means(report);
  std::printf("report written to %s (%.1fs)\n", cfg.out_dir.string().c_str(),
              report.wall_seconds);
  return 0;
}

int cmd_viz(const GlobalArgs& args, const std::string& trace_path,
            const std::string& image_path, const std::string& out_png) {
  const currseg::AppConfig cfg = resolve_config(args);
  if (!fs::exists(trace_path))
    throw currseg::DataError("trace file not found: " + trace_path);
  if (!fs::exists(image_path))
    throw currseg::DataError("image not found: " + image_path);
  const currseg::Image image = currseg::load_image_png(image_path);

  std::ifstream f(trace_path);
  json trace;
  try {
    f >> trace;
  } catch (const json::exception& e) {
    throw currseg::DataError("trace parse error: " + std::string(e.what()));
  }
  if (!trace.contains("stages") || !trace["stages"].is_array() ||
      trace["stages"].empty())
    throw currseg::DataError("trace has no stages: " + trace_path);

  const fs::path base = fs::path(trace_path).parent_path();
  std::vector<currseg::StageTrace> stages;
  for (const auto& entry : trace["stages"]) {
    currseg::StageTrace stage;
    stage.stage_index = entry.value("stage_index", 0);
    stage.result.binary =
        currseg::load_mask_png(base / entry.at("binary_mask").get<std::string>());
    if (entry.contains("boxes"))
      for (const auto& b : entry["boxes"]) {
        currseg::BoxPrompt box;
        box.x1 = b.at("x1").get<double>();
        box.y1 = b.at("y1").get<double>();
        box.x2 = b.at("x2").get<double>();
        box.y2 = b.at("y2").get<double>();
        box.score = b.value("score", 1.0);
        stage.prompts_used.boxes.push_back(box);
      }
    if (entry.contains("points"))
      for (const auto& p : entry["points"]) {
        currseg::PointPrompt point;
        point.x = p.at("x").get<double>();
        point.y = p.at("y").get<double>();
        point.label = p.at("label").get<int>();
        stage.prompts_used.points.push_back(point);
      }
    stages.push_back(std::move(stage));
  }

  fs::path out = out_png.empty() ? cfg.out_dir / "overlay.png" : fs::path(out_png);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  currseg::render_overlay(image, stages, out);
  std::printf("overlay written to %s\n", out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curriculum prompting for promptable image segmentation"};
  app.require_subcommand(1);

  GlobalArgs args;
  std::uint64_t seed_flag = 0;
  int jobs_flag = 0;
  std::string out_flag;
  app.add_option("--config", args.config_path, "config file (JSON)");
  auto* seed_opt = app.add_option("--seed", seed_flag, "RNG seed override");
  auto* jobs_opt = app.add_option("--jobs", jobs_flag, "worker threads");
  auto* out_opt = app.add_option("--out", out_flag, "output directory");

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset split");
  int synth_count = 0;
  synth->add_option("--count", synth_count, "number of image/mask pairs")
      ->required();

  auto* run = app.add_subcommand("run", "run the curriculum on one image");
  std::string run_image, run_gt;
  run->add_option("--image", run_image, "input image (PNG)")->required();
  run->add_option("--gt", run_gt, "ground-truth mask (PNG), enables metrics");

  auto* eval = app.add_subcommand("eval", "evaluate a scenario over a split");
  std::string eval_data, eval_split = "test", eval_scenario = "full-curriculum";
  eval->add_option("--data", eval_data, "dataset root")->required();
  eval->add_option("--split", eval_split, "split name (default: test)");
  eval->add_option("--scenario", eval_scenario,
                   "point-only | box-only | box-plus-mask | "
                   "point-plus-box-simultaneous | full-curriculum");

  auto* ablate = app.add_subcommand("ablate", "five-scenario prompt ablation");
  std::string ablate_data, ablate_split = "test";
  ablate->add_option("--data", ablate_data, "dataset root")->required();
  ablate->add_option("--split", ablate_split, "split name (default: test)");

  auto* viz = app.add_subcommand("viz", "render overlay from a saved trace");
  std::string viz_trace, viz_image, viz_out;
  viz->add_option("--trace", viz_trace, "trace.json from a run")->required();
  viz->add_option("--image", viz_image, "the image the trace refers to")->required();
  viz->add_option("--out-png", viz_out, "output PNG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*seed_opt) args.seed = seed_flag;
  if (*jobs_opt) args.jobs = jobs_flag;
  if (*out_opt) args.out = out_flag;

  try {
    if (synth->parsed()) return cmd_synth(args, synth_count);
    if (run->parsed()) return cmd_run(args, run_image, run_gt);
    if (eval->parsed()) return cmd_eval(args, eval_data, eval_split, eval_scenario);
    if (ablate->parsed()) return cmd_ablate(args, ablate_data, ablate_split);
    if (viz->parsed()) return cmd_viz(args, viz_trace, viz_image, viz_out);
  } catch (const currseg::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const currseg::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 2;
}
