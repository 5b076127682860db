#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "currseg/adapter.hpp"
#include "currseg/curriculum.hpp"
#include "currseg/rng.hpp"
#include "currseg/synthetic.hpp"

namespace currseg {

// One auditable home for every knob of the pipeline. Parsing is strict:
// unknown keys anywhere in the document are rejected with their path, and
// every field has a documented default, so the effective (echoed) config is
// always complete. Environment overrides: CURRSEG_SEED, CURRSEG_JOBS,
// CURRSEG_OUT (and CURRSEG_CONFIG, handled by the CLI).
struct AppConfig {
  enum class BackendKind { Builtin, External };

  std::uint64_t seed = 20240901;
  int jobs = 1;
  std::filesystem::path out_dir = "out";
  BackendKind backend = BackendKind::Builtin;
  AdapterConfig adapter;
  CurriculumConfig curriculum;
  SyntheticSpec synthetic;

  void validate() const {
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    curriculum.validate();
    synthetic.validate();
    if (backend == BackendKind::External && adapter.command.empty())
      throw ConfigError("backend.type is \"external\" but backend.command is empty");
  }
};

namespace config_detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& path,
                       const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key))
      throw ConfigError("unknown config key \"" +
                        (path.empty() ? key : path + "." + key) + "\"");
  }
}

template <typename T>
void get_to(const json& obj, const char* key, const std::string& path, T& out) {
  if (!obj.contains(key)) return;
  try {
    obj.at(key).get_to(out);
  } catch (const json::exception&) {
    throw ConfigError("bad value for config key \"" +
                      (path.empty() ? key : path + "." + key) + "\"");
  }
}

inline void get_path(const json& obj, const char* key, const std::string& path,
                     std::filesystem::path& out) {
  std::string s = out.string();
  get_to(obj, key, path, s);
  out = s;
}

inline void parse_profile(const json& obj, const std::string& path,
                          StageProfile& p) {
  check_keys(obj, path,
             {"prior_weight", "box_margin", "box_center_seed_radius",
              "point_seed_radius", "beta", "feature_smooth_sigma",
              "solver_tolerance", "solver_max_iters", "threshold"});
  get_to(obj, "prior_weight", path, p.prior_weight);
  get_to(obj, "box_margin", path, p.box_margin);
  get_to(obj, "box_center_seed_radius", path, p.box_center_seed_radius);
  get_to(obj, "point_seed_radius", path, p.point_seed_radius);
  get_to(obj, "beta", path, p.beta);
  get_to(obj, "feature_smooth_sigma", path, p.feature_smooth_sigma);
  get_to(obj, "solver_tolerance", path, p.solver_tolerance);
  get_to(obj, "solver_max_iters", path, p.solver_max_iters);
  get_to(obj, "threshold", path, p.threshold);
}

inline json profile_json(const StageProfile& p) {
  return json{{"prior_weight", p.prior_weight},
              {"box_margin", p.box_margin},
              {"box_center_seed_radius", p.box_center_seed_radius},
              {"point_seed_radius", p.point_seed_radius},
              {"beta", p.beta},
              {"feature_smooth_sigma", p.feature_smooth_sigma},
              {"solver_tolerance", p.solver_tolerance},
              {"solver_max_iters", p.solver_max_iters},
              {"threshold", p.threshold}};
}

}  // namespace config_detail

inline AppConfig parse_config(const nlohmann::json& doc) {
  using config_detail::check_keys;
  using config_detail::get_path;
  using config_detail::get_to;
  AppConfig cfg;

  if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
  check_keys(doc, "",
             {"seed", "jobs", "output", "backend", "curriculum", "coarse_profile",
              "fine_profile", "boxes", "points", "synthetic"});

  get_to(doc, "seed", "", cfg.seed);
  get_to(doc, "jobs", "", cfg.jobs);

  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    check_keys(o, "output", {"dir"});
    get_path(o, "dir", "output", cfg.out_dir);
  }

  if (doc.contains("backend")) {
    const auto& o = doc.at("backend");
    check_keys(o, "backend", {"type", "command", "timeout_seconds", "exchange_dir"});
    std::string type = "builtin";
    get_to(o, "type", "backend", type);
    if (type == "builtin") cfg.backend = AppConfig::BackendKind::Builtin;
    else if (type == "external") cfg.backend = AppConfig::BackendKind::External;
    else throw ConfigError("backend.type must be \"builtin\" or \"external\"");
    get_to(o, "command", "backend", cfg.adapter.command);
    get_to(o, "timeout_seconds", "backend", cfg.adapter.timeout_seconds);
    get_path(o, "exchange_dir", "backend", cfg.adapter.exchange_dir);
  }

  if (doc.contains("curriculum")) {
    const auto& o = doc.at("curriculum");
    check_keys(o, "curriculum", {"steps", "per_box_segmentation", "empty_box_policy"});
    get_to(o, "steps", "curriculum", cfg.curriculum.steps);
    get_to(o, "per_box_segmentation", "curriculum", cfg.curriculum.per_box_segmentation);
    if (o.contains("empty_box_policy")) {
      std::string policy;
      get_to(o, "empty_box_policy", "curriculum", policy);
      if (policy == "return-empty")
        cfg.curriculum.empty_box_policy = CurriculumConfig::EmptyBoxPolicy::ReturnEmpty;
      else if (policy == "whole-image-box")
        cfg.curriculum.empty_box_policy = CurriculumConfig::EmptyBoxPolicy::WholeImageBox;
      else
        throw ConfigError(
            "curriculum.empty_box_policy must be \"return-empty\" or \"whole-image-box\"");
    }
  }

  if (doc.contains("coarse_profile"))
    config_detail::parse_profile(doc.at("coarse_profile"), "coarse_profile",
                                 cfg.curriculum.coarse);
  if (doc.contains("fine_profile"))
    config_detail::parse_profile(doc.at("fine_profile"), "fine_profile",
                                 cfg.curriculum.fine);

  if (doc.contains("boxes")) {
    const auto& o = doc.at("boxes");
    check_keys(o, "boxes",
               {"method", "text_label", "polarity", "min_area", "smoothing_sigma",
                "nms_iou", "max_boxes", "external_path"});
    auto& b = cfg.curriculum.box_cfg;
    if (o.contains("method")) {
      std::string method;
      get_to(o, "method", "boxes", method);
      if (method == "builtin-threshold")
        b.method = BoxProposerConfig::Method::BuiltinThreshold;
      else if (method == "external-json")
        b.method = BoxProposerConfig::Method::ExternalJson;
      else
        throw ConfigError(
            "boxes.method must be \"builtin-threshold\" or \"external-json\"");
    }
    get_to(o, "text_label", "boxes", b.text_label);
    if (o.contains("polarity")) {
      std::string polarity;
      get_to(o, "polarity", "boxes", polarity);
      if (polarity == "dark-on-bright")
        b.polarity = BoxProposerConfig::Polarity::DarkOnBright;
      else if (polarity == "bright-on-dark")
        b.polarity = BoxProposerConfig::Polarity::BrightOnDark;
      else
        throw ConfigError(
            "boxes.polarity must be \"dark-on-bright\" or \"bright-on-dark\"");
    }
    get_to(o, "min_area", "boxes", b.min_area);
    get_to(o, "smoothing_sigma", "boxes", b.smoothing_sigma);
    get_to(o, "nms_iou", "boxes", b.nms_iou);
    get_to(o, "max_boxes", "boxes", b.max_boxes);
    get_path(o, "external_path", "boxes", b.external_path);
  }

  if (doc.contains("points")) {
    const auto& o = doc.at("points");
    check_keys(o, "points",
               {"k", "label", "snap_radius", "min_perimeter", "per_component",
                "gradient_smooth_sigma"});
    auto& p = cfg.curriculum.point_cfg;
    get_to(o, "k", "points", p.k);
    get_to(o, "label", "points", p.label);
    get_to(o, "snap_radius", "points", p.snap_radius);
    get_to(o, "min_perimeter", "points", p.min_perimeter);
    get_to(o, "per_component", "points", p.per_component);
    get_to(o, "gradient_smooth_sigma", "points", p.gradient_smooth_sigma);
  }

  if (doc.contains("synthetic")) {
    const auto& o = doc.at("synthetic");
    check_keys(o, "synthetic",
               {"width", "height", "lesions_min", "lesions_max", "base_radius",
                "shape_harmonics", "harmonic_amp_min", "harmonic_amp_max",
                "contrast", "edge_fuzz_sigma", "noise_sigma", "min_separation",
                "background_intensity"});
    auto& s = cfg.synthetic;
    get_to(o, "width", "synthetic", s.width);
    get_to(o, "height", "synthetic", s.height);
    get_to(o, "lesions_min", "synthetic", s.lesions_min);
    get_to(o, "lesions_max", "synthetic", s.lesions_max);
    get_to(o, "base_radius", "synthetic", s.base_radius);
    get_to(o, "shape_harmonics", "synthetic", s.shape_harmonics);
    get_to(o, "harmonic_amp_min", "synthetic", s.harmonic_amp_min);
    get_to(o, "harmonic_amp_max", "synthetic", s.harmonic_amp_max);
    get_to(o, "contrast", "synthetic", s.contrast);
    get_to(o, "edge_fuzz_sigma", "synthetic", s.edge_fuzz_sigma);
    get_to(o, "noise_sigma", "synthetic", s.noise_sigma);
    get_to(o, "min_separation", "synthetic", s.min_separation);
    get_to(o, "background_intensity", "synthetic", s.background_intensity);
  }

  // the dataset generator draws from the single global seed
  cfg.synthetic.rng_seed = cfg.seed;
  cfg.validate();
  return cfg;
}

inline AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json doc;
  try {
    f >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

// Full echo of the effective configuration; feeding it back through
// parse_config reproduces the same AppConfig.
inline nlohmann::json effective_json(const AppConfig& cfg) {
  using config_detail::profile_json;
  nlohmann::json doc;
  doc["seed"] = cfg.seed;
  doc["jobs"] = cfg.jobs;
  doc["output"] = {{"dir", cfg.out_dir.string()}};
  doc["backend"] = {
      {"type", cfg.backend == AppConfig::BackendKind::Builtin ? "builtin" : "external"},
      {"command", cfg.adapter.command},
      {"timeout_seconds", cfg.adapter.timeout_seconds},
      {"exchange_dir", cfg.adapter.exchange_dir.string()}};
  doc["curriculum"] = {
      {"steps", cfg.curriculum.steps},
      {"per_box_segmentation", cfg.curriculum.per_box_segmentation},
      {"empty_box_policy",
       cfg.curriculum.empty_box_policy == CurriculumConfig::EmptyBoxPolicy::ReturnEmpty
           ? "return-empty"
           : "whole-image-box"}};
  doc["coarse_profile"] = profile_json(cfg.curriculum.coarse);
  doc["fine_profile"] = profile_json(cfg.curriculum.fine);
  const auto& b = cfg.curriculum.box_cfg;
  doc["boxes"] = {
      {"method", b.method == BoxProposerConfig::Method::BuiltinThreshold
                     ? "builtin-threshold"
                     : "external-json"},
      {"text_label", b.text_label},
      {"polarity", b.polarity == BoxProposerConfig::Polarity::DarkOnBright
                       ? "dark-on-bright"
                       : "bright-on-dark"},
      {"min_area", b.min_area},
      {"smoothing_sigma", b.smoothing_sigma},
      {"nms_iou", b.nms_iou},
      {"max_boxes", b.max_boxes},
      {"external_path", b.external_path.string()}};
  const auto& p = cfg.curriculum.point_cfg;
  doc["points"] = {{"k", p.k},
                   {"label", p.label},
                   {"snap_radius", p.snap_radius},
                   {"min_perimeter", p.min_perimeter},
                   {"per_component", p.per_component},
                   {"gradient_smooth_sigma", p.gradient_smooth_sigma}};
  const auto& s = cfg.synthetic;
  doc["synthetic"] = {{"width", s.width},
                      {"height", s.height},
                      {"lesions_min", s.lesions_min},
                      {"lesions_max", s.lesions_max},
                      {"base_radius", s.base_radius},
                      {"shape_harmonics", s.shape_harmonics},
                      {"harmonic_amp_min", s.harmonic_amp_min},
                      {"harmonic_amp_max", s.harmonic_amp_max},
                      {"contrast", s.contrast},
                      {"edge_fuzz_sigma", s.edge_fuzz_sigma},
                      {"noise_sigma", s.noise_sigma},
                      {"min_separation", s.min_separation},
                      {"background_intensity", s.background_intensity}};
  return doc;
}

// Stable hash of the canonical (sorted-key) serialization. The output
// directory and the parallelism degree are excluded: they do not change any
// computed result, and the fingerprint identifies the experiment.
inline std::string config_fingerprint(const AppConfig& cfg) {
  nlohmann::json doc = effective_json(cfg);
  doc.erase("output");
  doc.erase("jobs");
  const std::string canon = doc.dump();
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canon.data(), canon.size())));
  return buf;
}

// CURRSEG_* environment overrides, applied between file and CLI flags.
inline void apply_env_overrides(AppConfig& cfg) {
  if (const char* v = std::getenv("CURRSEG_SEED"))
    cfg.seed = cfg.synthetic.rng_seed = std::strtoull(v, nullptr, 10);
  if (const char* v = std::getenv("CURRSEG_JOBS")) {
    cfg.jobs = std::atoi(v);
    if (cfg.jobs < 1) throw ConfigError("CURRSEG_JOBS must be >= 1");
  }
  if (const char* v = std::getenv("CURRSEG_OUT")) cfg.out_dir = v;
}

inline void write_effective_config(const AppConfig& cfg,
                                   const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::ofstream f(out_dir / "effective_config.json", std::ios::trunc);
  if (!f)
    throw DataError("cannot write effective config under " + out_dir.string());
  f << effective_json(cfg).dump(2) << "\n";
}

}  // namespace currseg
