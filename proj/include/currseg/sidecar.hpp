#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "currseg/prompts.hpp"

namespace currseg {

// Sidecar ingestion for real detector / keypoint-network outputs.
// Boxes:  [{"x1":f,"y1":f,"x2":f,"y2":f,"score":f,"text":s?}, ...]
// Points: [{"x":f,"y":f,"label":0|1}, ...]
// Extra keys are tolerated (detectors attach metadata); the named keys must
// be present with the right types. Discovery convention for a given image:
// <image_stem>.boxes.json / <image_stem>.points.json alongside the image.

namespace detail {

inline nlohmann::json load_json_array(const std::filesystem::path& path,
                                      const char* what) {
  if (!std::filesystem::exists(path))
    throw DataError(std::string(what) + " file missing: " + path.string());
  std::ifstream f(path);
  nlohmann::json doc;
  try {
    f >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string(what) + " file is not valid JSON: " +
                      path.string() + " (" + e.what() + ")");
  }
  if (!doc.is_array())
    throw SchemaError(std::string(what) + " file must hold a JSON array: " +
                      path.string());
  return doc;
}

inline double require_number(const nlohmann::json& obj, const char* key,
                             const std::filesystem::path& path) {
  if (!obj.contains(key) || !obj[key].is_number())
    throw SchemaError("missing or non-numeric \"" + std::string(key) +
                      "\" in " + path.string());
  return obj[key].get<double>();
}

}  // namespace detail

inline std::vector<BoxPrompt> load_boxes_json(const std::filesystem::path& path) {
  const auto doc = detail::load_json_array(path, "boxes");
  std::vector<BoxPrompt> boxes;
  boxes.reserve(doc.size());
  for (const auto& item : doc) {
    if (!item.is_object())
      throw SchemaError("boxes entries must be objects: " + path.string());
    BoxPrompt b;
    b.x1 = detail::require_number(item, "x1", path);
    b.y1 = detail::require_number(item, "y1", path);
    b.x2 = detail::require_number(item, "x2", path);
    b.y2 = detail::require_number(item, "y2", path);
    b.score = detail::require_number(item, "score", path);
    if (!(b.score >= 0.0 && b.score <= 1.0))
      throw SchemaError("box score outside [0,1] in " + path.string());
    if (!(b.x1 < b.x2 && b.y1 < b.y2))
      throw SchemaError("degenerate box (x1<x2, y1<y2 required) in " +
                        path.string());
    boxes.push_back(b);
  }
  return boxes;
}

inline std::vector<PointPrompt> load_points_json(const std::filesystem::path& path) {
  const auto doc = detail::load_json_array(path, "points");
  std::vector<PointPrompt> points;
  points.reserve(doc.size());
  for (const auto& item : doc) {
    if (!item.is_object())
      throw SchemaError("points entries must be objects: " + path.string());
    PointPrompt p;
    p.x = detail::require_number(item, "x", path);
    p.y = detail::require_number(item, "y", path);
    if (!item.contains("label") || !item["label"].is_number_integer())
      throw SchemaError("missing or non-integer \"label\" in " + path.string());
    p.label = item["label"].get<int>();
    if (p.label != 0 && p.label != 1)
      throw SchemaError("point label must be 0 or 1 in " + path.string() +
                        ", got " + std::to_string(p.label));
    points.push_back(p);
  }
  return points;
}

// Bounds-validating overloads. In strict mode, coordinates outside the image
// raise PromptError; otherwise points clamp to the raster and boxes clamp to
// the image rectangle.
inline std::vector<PointPrompt> load_points_json(
    const std::filesystem::path& path, int width, int height, bool strict) {
  auto points = load_points_json(path);
  for (auto& p : points) {
    if (strict) {
      validate_point(p, width, height);
    } else {
      p.x = std::clamp(p.x, 0.0, width - 1.0);
      p.y = std::clamp(p.y, 0.0, height - 1.0);
    }
  }
  return points;
}

inline std::vector<BoxPrompt> load_boxes_json(const std::filesystem::path& path,
                                              int width, int height,
                                              bool strict) {
  auto boxes = load_boxes_json(path);
  for (auto& b : boxes) {
    if (strict &&
        (b.x1 < 0 || b.y1 < 0 || b.x2 > width || b.y2 > height))
      throw PromptError("box outside image bounds in " + path.string());
    b = clamp_box(b, width, height);
  }
  return boxes;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& image_path,
                                          const char* kind) {
  std::filesystem::path p = image_path;
  p.replace_extension();
  p += std::string(".") + kind + ".json";
  return p;
}

}  // namespace currseg
