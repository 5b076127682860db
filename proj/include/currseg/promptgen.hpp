#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "currseg/boxes.hpp"
#include "currseg/contours.hpp"
#include "currseg/filters.hpp"
#include "currseg/sidecar.hpp"

namespace currseg {

// Automatic box proposal: the stand-in for a text-grounded object detector.
// The builtin method finds candidate regions by thresholding; the
// external-json method ingests real detector output from a sidecar file.
struct BoxProposerConfig {
  enum class Method { BuiltinThreshold, ExternalJson };
  enum class Polarity { DarkOnBright, BrightOnDark };

  Method method = Method::BuiltinThreshold;
  std::string text_label;       // forwarded to external detectors, unused here
  Polarity polarity = Polarity::DarkOnBright;
  double min_area = 20.0;       // px^2, components below are dropped
  double smoothing_sigma = 1.5; // px, pre-threshold blur
  double nms_iou = 0.5;         // the caller applies core NMS with this
  int max_boxes = 10;
  std::filesystem::path external_path;  // sidecar for Method::ExternalJson

  void validate() const {
    if (min_area < 1) throw ConfigError("BoxProposerConfig: min_area must be >= 1");
    if (!(nms_iou > 0 && nms_iou <= 1))
      throw ConfigError("BoxProposerConfig: nms_iou must be in (0,1]");
    if (max_boxes < 1) throw ConfigError("BoxProposerConfig: max_boxes must be >= 1");
    if (smoothing_sigma < 0)
      throw ConfigError("BoxProposerConfig: smoothing_sigma must be >= 0");
  }
};

// Edge-point generation: the stand-in for a keypoint network trained on
// lesion edges. Points are sampled on the coarse contour and optionally
// snapped to the strongest nearby intensity gradient, which is where a real
// edge detector would fire.
struct EdgePointConfig {
  int k = 8;              // points per selected contour
  int label = 0;          // negative by default
  double snap_radius = 8.0;     // px along the outward normal; 0 disables
  double min_perimeter = 10.0;  // px, contours below are ignored
  bool per_component = true;    // k points on every component vs k on the largest
  double gradient_smooth_sigma = 2.0;  // px, blur before the gradient argmax

  void validate() const {
    if (k < 1) throw ConfigError("EdgePointConfig: k must be >= 1");
    if (snap_radius < 0) throw ConfigError("EdgePointConfig: snap_radius must be >= 0");
    if (label != 0 && label != 1)
      throw ConfigError("EdgePointConfig: label must be 0 or 1");
    if (gradient_smooth_sigma < 0)
      throw ConfigError("EdgePointConfig: gradient_smooth_sigma must be >= 0");
  }
};

namespace detail {

// Mean contrast between a component and its surrounding ring (the expanded
// bounding box minus all foreground), clamped to [0,1].
inline double component_contrast(const std::vector<double>& gray,
                                 const std::vector<int>& labels, int width,
                                 int height, int label, int bx0, int by0,
                                 int bx1, int by1) {
  constexpr int kRing = 3;
  double sum_in = 0.0, sum_ring = 0.0;
  std::size_t n_in = 0, n_ring = 0;
  const int x0 = std::max(0, bx0 - kRing), x1 = std::min(width - 1, bx1 + kRing);
  const int y0 = std::max(0, by0 - kRing), y1 = std::min(height - 1, by1 + kRing);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      if (labels[i] == label) {
        sum_in += gray[i];
        ++n_in;
      } else if (labels[i] == 0) {
        sum_ring += gray[i];
        ++n_ring;
      }
    }
  if (n_in == 0 || n_ring == 0) return 0.0;
  return std::clamp(std::abs(sum_in / n_in - sum_ring / n_ring), 0.0, 1.0);
}

}  // namespace detail

// Proposes candidate boxes. The builtin path: Gaussian smooth, Otsu threshold
// oriented by polarity, 4-connected components, area filter, tight bounding
// boxes scored by local contrast. The result is NOT yet NMS-filtered; callers
// apply nms(boxes, cfg.nms_iou) as a separate post-processing step.
inline std::vector<BoxPrompt> propose_boxes(const Image& image,
                                            const BoxProposerConfig& cfg) {
  cfg.validate();
  if (cfg.method == BoxProposerConfig::Method::ExternalJson) {
    std::vector<BoxPrompt> boxes = load_boxes_json(cfg.external_path);
    std::vector<BoxPrompt> clamped;
    clamped.reserve(boxes.size());
    for (const auto& b : boxes)
      clamped.push_back(clamp_box(b, image.width, image.height));
    return clamped;
  }

  const int w = image.width, h = image.height;
  std::vector<double> gray = filters::gray_field(image);
  const std::vector<double> smoothed =
      filters::gaussian_blur(gray, w, h, cfg.smoothing_sigma);
  const auto [lo_it, hi_it] = std::minmax_element(smoothed.begin(), smoothed.end());
  if (*hi_it - *lo_it < 1e-9) return {};  // flat image: nothing to threshold
  const double t = filters::otsu_threshold(smoothed);

  BinaryMask fg(w, h);
  const bool dark = cfg.polarity == BoxProposerConfig::Polarity::DarkOnBright;
  for (std::size_t i = 0; i < smoothed.size(); ++i)
    fg.bits[i] = (dark ? smoothed[i] < t : smoothed[i] > t) ? 1 : 0;

  int count = 0;
  const std::vector<int> labels = filters::label_components(fg, count);
  if (count == 0) return {};

  struct Extent {
    int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
    std::size_t area = 0;
  };
  std::vector<Extent> extents(static_cast<std::size_t>(count) + 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int l = labels[static_cast<std::size_t>(y) * w + x];
      if (!l) continue;
      auto& e = extents[static_cast<std::size_t>(l)];
      e.x0 = std::min(e.x0, x);
      e.y0 = std::min(e.y0, y);
      e.x1 = std::max(e.x1, x);
      e.y1 = std::max(e.y1, y);
      ++e.area;
    }

  std::vector<BoxPrompt> boxes;
  for (int l = 1; l <= count; ++l) {
    const auto& e = extents[static_cast<std::size_t>(l)];
    if (static_cast<double>(e.area) < cfg.min_area) continue;
    BoxPrompt b;
    b.x1 = e.x0;
    b.y1 = e.y0;
    b.x2 = e.x1 + 1.0;  // continuous convention: the box covers its pixels
    b.y2 = e.y1 + 1.0;
    b.score = detail::component_contrast(gray, labels, w, h, l, e.x0, e.y0,
                                         e.x1, e.y1);
    boxes.push_back(b);
  }
  std::stable_sort(boxes.begin(), boxes.end(), nms_order);
  if (boxes.size() > static_cast<std::size_t>(cfg.max_boxes))
    boxes.resize(static_cast<std::size_t>(cfg.max_boxes));
  return boxes;
}

namespace detail {

struct ArcSample {
  double x, y;    // point on the polyline
  double nx, ny;  // outward normal (unit)
};

// Position and outward normal at arc length s along a closed fg-left contour.
inline ArcSample sample_at_arc_length(const Contour& contour, double s) {
  const auto& pts = contour.points;
  const std::size_t n = pts.size();
  double remaining = s;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % n];
    const double dx = b.first - a.first, dy = b.second - a.second;
    const double len = std::hypot(dx, dy);
    if (remaining <= len || i + 1 == n) {
      const double t = len > 0 ? std::clamp(remaining / len, 0.0, 1.0) : 0.0;
      ArcSample out;
      out.x = a.first + t * dx;
      out.y = a.second + t * dy;
      // foreground is on the left of travel, so outward is to the right
      const double inv = len > 0 ? 1.0 / len : 0.0;
      out.nx = -dy * inv;
      out.ny = dx * inv;
      return out;
    }
    remaining -= len;
  }
  return {pts[0].first, pts[0].second, 0.0, -1.0};
}

}  // namespace detail

// Samples k edge points per selected contour of the coarse mask, equally
// spaced by arc length from the topmost vertex, each snapped along the
// outward normal to the strongest intensity gradient within +-snap_radius.
// Every point carries cfg.label. Empty coarse mask gives an empty list.
inline std::vector<PointPrompt> sample_edge_points(const BinaryMask& coarse,
                                                   const Image& image,
                                                   const EdgePointConfig& cfg) {
  cfg.validate();
  if (coarse.width != image.width || coarse.height != image.height)
    throw DimensionError("sample_edge_points: mask and image dimensions differ");

  std::vector<Contour> contours = extract_contours(coarse);
  std::vector<const Contour*> selected;
  for (const auto& c : contours)
    if (c.perimeter >= cfg.min_perimeter) selected.push_back(&c);
  if (selected.empty()) return {};
  if (!cfg.per_component) selected.resize(1);  // contours are perimeter-sorted

  const int w = image.width, h = image.height;
  std::vector<double> grad;
  if (cfg.snap_radius > 0) {
    std::vector<double> gray = filters::gray_field(image);
    gray = filters::gaussian_blur(gray, w, h, cfg.gradient_smooth_sigma);
    grad = filters::gradient_magnitude(gray, w, h);
  }

  std::vector<PointPrompt> points;
  points.reserve(selected.size() * static_cast<std::size_t>(cfg.k));
  for (const Contour* contour : selected) {
    const double step = contour->perimeter / cfg.k;
    for (int i = 0; i < cfg.k; ++i) {
      auto s = detail::sample_at_arc_length(*contour, step * i);
      double px = s.x, py = s.y;
      if (cfg.snap_radius > 0) {
        double best_val = -1.0, best_t = 0.0;
        for (double t = -cfg.snap_radius; t <= cfg.snap_radius + 1e-9; t += 0.25) {
          const double qx = s.x + t * s.nx, qy = s.y + t * s.ny;
          if (qx < 0 || qy < 0 || qx > w - 1 || qy > h - 1) continue;
          const double v = filters::sample_bilinear(grad, w, h, qx, qy);
          // prefer staying close to the contour on ties
          if (v > best_val + 1e-12 ||
              (std::abs(v - best_val) <= 1e-12 && std::abs(t) < std::abs(best_t))) {
            best_val = v;
            best_t = t;
          }
        }
        px = s.x + best_t * s.nx;
        py = s.y + best_t * s.ny;
      }
      PointPrompt p;
      p.x = std::clamp(px, 0.0, w - 1.0);
      p.y = std::clamp(py, 0.0, h - 1.0);
      p.label = cfg.label;
      points.push_back(p);
    }
  }
  return points;
}

}  // namespace currseg
