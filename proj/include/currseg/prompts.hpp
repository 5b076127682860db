#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "currseg/errors.hpp"
#include "currseg/image.hpp"

namespace currseg {

// A click prompt. label 1 asserts foreground at (x, y), label 0 asserts
// background. Coordinates are sub-pixel, in [0, width) x [0, height).
struct PointPrompt {
  double x = 0.0;
  double y = 0.0;
  int label = 1;
};

// Axis-aligned box prompt with continuous corner coordinates (x1,y1) top-left
// and (x2,y2) bottom-right. Area convention is (x2-x1)*(y2-y1), no +1.
struct BoxPrompt {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
  double score = 1.0;
};

// Closed polyline of sub-pixel vertices around one foreground region.
// Vertices are ordered; the last connects back to the first.
struct Contour {
  std::vector<std::pair<double, double>> points;
  double perimeter = 0.0;
};

// The prompt set handed to a segmenter for one call. Points and boxes travel
// in separate sparse channels; the dense prior is a soft mask combined with
// the image features independently of the sparse channels.
struct PromptBundle {
  std::vector<PointPrompt> points;
  std::vector<BoxPrompt> boxes;
  std::optional<SoftMask> dense_prior;

  bool empty() const {
    return points.empty() && boxes.empty() && !dense_prior.has_value();
  }
};

inline double box_area(const BoxPrompt& b) {
  return (b.x2 - b.x1) * (b.y2 - b.y1);
}

inline void validate_point(const PointPrompt& p, int width, int height) {
  if (p.label != 0 && p.label != 1)
    throw PromptError("point label must be 0 or 1, got " + std::to_string(p.label));
  if (!(p.x >= 0.0 && p.x < width && p.y >= 0.0 && p.y < height))
    throw PromptError("point (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                      ") outside image bounds " + std::to_string(width) + "x" +
                      std::to_string(height));
}

inline void validate_box(const BoxPrompt& b) {
  if (!(b.x1 < b.x2 && b.y1 < b.y2))
    throw PromptError("degenerate box: corners must satisfy x1 < x2 and y1 < y2");
  if (!(b.score >= 0.0 && b.score <= 1.0))
    throw PromptError("box score must be in [0,1]");
}

// Clamps a box to the image. Throws if nothing is left after clamping.
inline BoxPrompt clamp_box(const BoxPrompt& b, int width, int height) {
  BoxPrompt c = b;
  c.x1 = std::clamp(c.x1, 0.0, static_cast<double>(width));
  c.x2 = std::clamp(c.x2, 0.0, static_cast<double>(width));
  c.y1 = std::clamp(c.y1, 0.0, static_cast<double>(height));
  c.y2 = std::clamp(c.y2, 0.0, static_cast<double>(height));
  if (!(c.x1 < c.x2 && c.y1 < c.y2))
    throw PromptError("box degenerate after clamping to image bounds");
  return c;
}

inline void validate_bundle(const PromptBundle& bundle, int width, int height) {
  if (bundle.empty()) throw PromptError("empty prompt bundle");
  for (const auto& p : bundle.points) validate_point(p, width, height);
  for (const auto& b : bundle.boxes) {
    validate_box(b);
    clamp_box(b, width, height);  // throws when degenerate inside the image
  }
  if (bundle.dense_prior &&
      (bundle.dense_prior->width != width || bundle.dense_prior->height != height))
    throw DimensionError("dense prior dimensions do not match the image");
}

}  // namespace currseg
