#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "currseg/filters.hpp"
#include "currseg/image.hpp"
#include "currseg/prompts.hpp"

namespace currseg {

// Marching squares at the 0.5 iso-level of a 0/1 mask sampled at pixel
// centers. Conventions:
//   - pixels outside the raster count as background, so every contour closes;
//   - crossings land on pixel-pair midpoints (values are binary);
//   - contours are directed with foreground on the LEFT in image coordinates
//     (x right, y down);
//   - saddle cells keep diagonal foreground pixels apart, matching
//     4-connectivity of components;
//   - only the outer boundary of each 4-connected component is returned
//     (hole boundaries are dropped), ordered by descending perimeter.

namespace detail {

// Crossing vertices are midpoints of a horizontal or vertical pixel-pair
// edge; identified by the lower-coordinate pixel plus the orientation bit.
inline std::int64_t edge_key(int x, int y, bool vertical, int width) {
  return (static_cast<std::int64_t>(y + 1) * (width + 2) + (x + 1)) * 2 +
         (vertical ? 1 : 0);
}

inline std::pair<double, double> edge_point(int x, int y, bool vertical) {
  return vertical ? std::make_pair(static_cast<double>(x), y + 0.5)
                  : std::make_pair(x + 0.5, static_cast<double>(y));
}

inline double polygon_area(const std::vector<std::pair<double, double>>& pts) {
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const auto& q = pts[(i + 1) % pts.size()];
    a += p.first * q.second - q.first * p.second;
  }
  return 0.5 * a;
}

}  // namespace detail

inline double contour_perimeter(const std::vector<std::pair<double, double>>& pts) {
  double len = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const auto& q = pts[(i + 1) % pts.size()];
    len += std::hypot(q.first - p.first, q.second - p.second);
  }
  return len;
}

inline std::vector<Contour> extract_contours(const BinaryMask& mask) {
  const int w = mask.width, h = mask.height;
  auto fg = [&](int x, int y) {
    return mask.in_bounds(x, y) && mask.at(x, y) != 0;
  };

  // successor[start edge] = end edge for every directed crossing segment
  std::unordered_map<std::int64_t, std::int64_t> successor;
  successor.reserve(static_cast<std::size_t>(w) * 4);
  for (int cy = -1; cy < h; ++cy) {
    for (int cx = -1; cx < w; ++cx) {
      const int code = (fg(cx, cy) ? 1 : 0) | (fg(cx + 1, cy) ? 2 : 0) |
                       (fg(cx + 1, cy + 1) ? 4 : 0) | (fg(cx, cy + 1) ? 8 : 0);
      if (code == 0 || code == 15) continue;
      const std::int64_t top = detail::edge_key(cx, cy, false, w);
      const std::int64_t right = detail::edge_key(cx + 1, cy, true, w);
      const std::int64_t bottom = detail::edge_key(cx, cy + 1, false, w);
      const std::int64_t left = detail::edge_key(cx, cy, true, w);
      switch (code) {
        case 1:  successor[left] = top; break;
        case 2:  successor[top] = right; break;
        case 3:  successor[left] = right; break;
        case 4:  successor[right] = bottom; break;
        case 5:  successor[left] = top; successor[right] = bottom; break;
        case 6:  successor[top] = bottom; break;
        case 7:  successor[left] = bottom; break;
        case 8:  successor[bottom] = left; break;
        case 9:  successor[bottom] = top; break;
        case 10: successor[top] = right; successor[bottom] = left; break;
        case 11: successor[bottom] = right; break;
        case 12: successor[right] = left; break;
        case 13: successor[right] = top; break;
        case 14: successor[top] = left; break;
        default: break;
      }
    }
  }

  auto decode = [&](std::int64_t key) {
    const bool vertical = (key & 1) != 0;
    const std::int64_t cell = key >> 1;
    const int x = static_cast<int>(cell % (w + 2)) - 1;
    const int y = static_cast<int>(cell / (w + 2)) - 1;
    return std::tuple<int, int, bool>(x, y, vertical);
  };

  int component_count = 0;
  const std::vector<int> labels = filters::label_components(mask, component_count);
  if (component_count == 0) return {};

  // Trace cycles, then keep the largest-area loop per component (the outer
  // boundary; hole loops enclose strictly less area).
  struct Traced {
    Contour contour;
    int label;
    double area;
  };
  std::vector<Traced> traced;
  std::unordered_map<std::int64_t, bool> visited;
  visited.reserve(successor.size());
  for (const auto& [start, ignored] : successor) {
    (void)ignored;
    if (visited[start]) continue;
    Contour c;
    std::int64_t cur = start;
    do {
      visited[cur] = true;
      const auto [ex, ey, vertical] = decode(cur);
      c.points.push_back(detail::edge_point(ex, ey, vertical));
      cur = successor.at(cur);
    } while (cur != start);
    // Canonical rotation: start at the topmost vertex (ties: leftmost), so
    // the traced order does not depend on hash-map iteration.
    std::size_t top = 0;
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      if (c.points[i].second < c.points[top].second ||
          (c.points[i].second == c.points[top].second &&
           c.points[i].first < c.points[top].first))
        top = i;
    }
    std::rotate(c.points.begin(), c.points.begin() + static_cast<std::ptrdiff_t>(top),
                c.points.end());
    c.perimeter = contour_perimeter(c.points);
    // Any crossing separates one foreground pixel from one background pixel;
    // the foreground one names the component.
    const auto [ex, ey, vertical] = decode(start);
    int px = ex, py = ey;
    if (!fg(px, py)) {
      px = vertical ? ex : ex + 1;
      py = vertical ? ey + 1 : ey;
    }
    const int label = labels[static_cast<std::size_t>(py) * w + px];
    const double area = std::abs(detail::polygon_area(c.points));
    traced.push_back({std::move(c), label, area});
  }

  std::vector<int> best(component_count + 1, -1);
  for (std::size_t i = 0; i < traced.size(); ++i) {
    const int l = traced[i].label;
    if (best[l] < 0 || traced[i].area > traced[static_cast<std::size_t>(best[l])].area)
      best[l] = static_cast<int>(i);
  }

  std::vector<Contour> result;
  for (int l = 1; l <= component_count; ++l)
    if (best[l] >= 0)
      result.push_back(std::move(traced[static_cast<std::size_t>(best[l])].contour));
  // descending perimeter; ties by topmost-leftmost start vertex
  std::stable_sort(result.begin(), result.end(),
                   [](const Contour& a, const Contour& b) {
                     if (a.perimeter != b.perimeter) return a.perimeter > b.perimeter;
                     if (a.points[0].second != b.points[0].second)
                       return a.points[0].second < b.points[0].second;
                     return a.points[0].first < b.points[0].first;
                   });
  return result;
}

}  // namespace currseg
