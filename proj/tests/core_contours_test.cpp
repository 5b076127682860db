#include <gtest/gtest.h>

#include <cmath>
#include <queue>

#include "currseg/contours.hpp"
#include "currseg/image.hpp"

using namespace currseg;

namespace {

// Test-local 4-connected component counter (independent of filters.hpp).
int oracle_component_count(const BinaryMask& m) {
  std::vector<char> seen(m.bits.size(), 0);
  int count = 0;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      const std::size_t start = static_cast<std::size_t>(y) * m.width + x;
      if (!m.bits[start] || seen[start]) continue;
      ++count;
      std::queue<std::pair<int, int>> q;
      q.push({x, y});
      seen[start] = 1;
      while (!q.empty()) {
        auto [cx, cy] = q.front();
        q.pop();
        const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = cx + dx[k], ny = cy + dy[k];
          if (!m.in_bounds(nx, ny)) continue;
          const std::size_t j = static_cast<std::size_t>(ny) * m.width + nx;
          if (m.bits[j] && !seen[j]) {
            seen[j] = 1;
            q.push({nx, ny});
          }
        }
      }
    }
  return count;
}

BinaryMask filled_rect(int w, int h, int x0, int y0, int x1, int y1) {
  BinaryMask m(w, h);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) m.at(x, y) = 1;
  return m;
}

BinaryMask rasterize_disk(int w, int h, double cx, double cy, double r) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.at(x, y) = 1;
  return m;
}

double point_to_contour_distance(const Contour& c, double px, double py) {
  double best = 1e30;
  for (const auto& [x, y] : c.points)
    best = std::min(best, std::hypot(x - px, y - py));
  return best;
}

}  // namespace

TEST(ExtractContours, EmptyMask) {
  EXPECT_TRUE(extract_contours(BinaryMask(16, 16)).empty());
}

TEST(ExtractContours, FilledSquarePerimeter) {
  // 10x10 filled square: boundary at the 0.5 iso-level, corners beveled
  const auto m = filled_rect(20, 20, 5, 5, 14, 14);
  const auto contours = extract_contours(m);
  ASSERT_EQ(contours.size(), 1u);
  EXPECT_GE(contours[0].perimeter, 36.0);
  EXPECT_LE(contours[0].perimeter, 44.0);
  EXPECT_GE(contours[0].points.size(), 3u);
}

TEST(ExtractContours, TwoDisjointBlobs) {
  BinaryMask m(32, 32);
  for (int y = 2; y <= 6; ++y)
    for (int x = 2; x <= 6; ++x) m.at(x, y) = 1;
  for (int y = 20; y <= 27; ++y)
    for (int x = 18; x <= 28; ++x) m.at(x, y) = 1;
  ASSERT_EQ(oracle_component_count(m), 2);
  const auto contours = extract_contours(m);
  ASSERT_EQ(contours.size(), 2u);
  // ordered by descending perimeter: the big blob first
  EXPECT_GT(contours[0].perimeter, contours[1].perimeter);
}

TEST(ExtractContours, SinglePixel) {
  BinaryMask m(8, 8);
  m.at(3, 4) = 1;
  const auto contours = extract_contours(m);
  ASSERT_EQ(contours.size(), 1u);
  EXPECT_GE(contours[0].points.size(), 3u);
  EXPECT_GT(contours[0].perimeter, 0.0);
  // the diamond around (3,4) has perimeter 4 * sqrt(2)/2 * 2 = 2*sqrt(2)
  EXPECT_NEAR(contours[0].perimeter, 2.0 * std::sqrt(2.0), 1e-9);
}

TEST(ExtractContours, DiagonalPixelsAreSeparateComponents) {
  // 4-connectivity: diagonal neighbors do not merge
  BinaryMask m(8, 8);
  m.at(3, 3) = 1;
  m.at(4, 4) = 1;
  EXPECT_EQ(extract_contours(m).size(), 2u);
}

TEST(ExtractContours, BorderTouchingComponentCloses) {
  const auto m = filled_rect(10, 10, 0, 0, 4, 9);  // touches three borders
  const auto contours = extract_contours(m);
  ASSERT_EQ(contours.size(), 1u);
  // closed loop: consecutive vertices stay within one marching-squares step
  const auto& pts = contours[0].points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % pts.size()];
    EXPECT_LE(std::hypot(a.first - b.first, a.second - b.second), 1.0 + 1e-9);
  }
}

TEST(ExtractContours, HoleBoundariesAreDropped) {
  // ring: 12x12 block with a 4x4 hole -> one outer contour only
  auto m = filled_rect(20, 20, 3, 3, 14, 14);
  for (int y = 7; y <= 10; ++y)
    for (int x = 7; x <= 10; ++x) m.at(x, y) = 0;
  const auto contours = extract_contours(m);
  ASSERT_EQ(contours.size(), 1u);
  // outer square side 12: perimeter near 4*11, well above the hole's
  EXPECT_GT(contours[0].perimeter, 40.0);
}

TEST(ExtractContours, FirstVertexIsTopmost) {
  const auto m = rasterize_disk(40, 40, 20, 20, 9);
  const auto contours = extract_contours(m);
  ASSERT_EQ(contours.size(), 1u);
  const auto& pts = contours[0].points;
  for (const auto& [x, y] : pts) {
    EXPECT_GE(y, pts[0].second);
    if (y == pts[0].second) {
      EXPECT_GE(x, pts[0].first);
    }
  }
}

// Rasterize convex shapes and compare traced perimeter to the analytic one.
TEST(ExtractContours, ConvexPerimeterWithinTenPercent) {
  struct Case {
    BinaryMask mask;
    double true_perimeter;
  };
  std::vector<Case> cases;
  cases.push_back({rasterize_disk(64, 64, 32, 32, 20), 2 * M_PI * 20});
  cases.push_back({filled_rect(64, 64, 10, 14, 39, 43), 4 * 30.0});
  {
    // diamond |x-32|+|y-32| <= 18: perimeter 4 * 18 * sqrt(2)
    BinaryMask m(64, 64);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        if (std::abs(x - 32) + std::abs(y - 32) <= 18) m.at(x, y) = 1;
    cases.push_back({std::move(m), 4 * 18 * std::sqrt(2.0)});
  }
  for (const auto& c : cases) {
    const auto contours = extract_contours(c.mask);
    ASSERT_EQ(contours.size(), 1u);
    EXPECT_NEAR(contours[0].perimeter, c.true_perimeter, 0.10 * c.true_perimeter);
  }
}

TEST(ExtractContours, VerticesHugTheComponent) {
  const auto m = rasterize_disk(64, 64, 30, 28, 12);
  const auto contours = extract_contours(m);
  ASSERT_EQ(contours.size(), 1u);
  for (const auto& [x, y] : contours[0].points) {
    const double rho = std::hypot(x - 30, y - 28);
    EXPECT_NEAR(rho, 12.0, 1.2);
  }
  (void)point_to_contour_distance;
}

// --- mask_union ---

TEST(MaskUnion, SingleAndWithEmpty) {
  const auto a = filled_rect(10, 10, 2, 2, 5, 5);
  const auto u1 = mask_union({a});
  EXPECT_EQ(u1.bits, a.bits);
  const auto u2 = mask_union({a, BinaryMask(10, 10)});
  EXPECT_EQ(u2.bits, a.bits);
}

TEST(MaskUnion, InclusionExclusion) {
  const auto a = filled_rect(20, 20, 2, 2, 11, 11);
  const auto b = filled_rect(20, 20, 8, 8, 17, 17);
  std::size_t inter = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) inter += a.bits[i] && b.bits[i];
  const auto u = mask_union({a, b});
  EXPECT_EQ(u.count(), a.count() + b.count() - inter);
}

TEST(MaskUnion, Errors) {
  EXPECT_THROW(mask_union({}), Error);
  EXPECT_THROW(mask_union({BinaryMask(4, 4), BinaryMask(5, 4)}), DimensionError);
}
