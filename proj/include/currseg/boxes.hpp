#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "currseg/prompts.hpp"

namespace currseg {

// Intersection-over-union of two boxes under the continuous area convention.
// Disjoint boxes score 0.
inline double box_iou(const BoxPrompt& a, const BoxPrompt& b) {
  const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = ix * iy;
  const double uni = box_area(a) + box_area(b) - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

// Orders candidates by score descending; ties broken by smaller x1, then
// smaller y1, so the survivor set is deterministic.
inline bool nms_order(const BoxPrompt& a, const BoxPrompt& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.x1 != b.x1) return a.x1 < b.x1;
  return a.y1 < b.y1;
}

// Greedy non-maximum suppression: walk boxes by descending score, keep a box
// unless it overlaps an already kept box with IoU above the threshold.
// Output is sorted by descending score.
inline std::vector<BoxPrompt> nms(const std::vector<BoxPrompt>& boxes,
                                  double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
    throw Error("nms: iou_threshold must be in (0, 1]");
  std::vector<BoxPrompt> sorted = boxes;
  std::stable_sort(sorted.begin(), sorted.end(), nms_order);
  std::vector<BoxPrompt> kept;
  kept.reserve(sorted.size());
  for (const auto& candidate : sorted) {
    bool suppressed = false;
    for (const auto& survivor : kept) {
      if (box_iou(candidate, survivor) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(candidate);
  }
  return kept;
}

}  // namespace currseg
