#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "currseg/promptgen.hpp"
#include "currseg/rng.hpp"

using namespace currseg;
namespace fs = std::filesystem;

namespace {

Image constant_image(int w, int h, double v) { return Image(w, h, 1, v); }

// crisp dark rectangle on bright ground
void paint_rect(Image& img, int x0, int y0, int x1, int y1, double v) {
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) img.at(x, y) = v;
}

Image disk_image(int w, int h, double cx, double cy, double r, double inside,
                 double outside, double fuzz_sigma) {
  std::vector<double> field(static_cast<std::size_t>(w) * h, outside);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
        field[static_cast<std::size_t>(y) * w + x] = inside;
  field = filters::gaussian_blur(field, w, h, fuzz_sigma);
  Image img(w, h, 1);
  img.pixels = std::move(field);
  return img;
}

BinaryMask disk_mask(int w, int h, double cx, double cy, double r) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.at(x, y) = 1;
  return m;
}

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream f(p, std::ios::trunc);
  f << content;
  return p;
}

std::string serialize_points(const std::vector<PointPrompt>& pts) {
  std::string s;
  for (const auto& p : pts)
    s += std::to_string(p.x) + "," + std::to_string(p.y) + "," +
         std::to_string(p.label) + ";";
  return s;
}

}  // namespace

// --- propose_boxes, builtin method ---

TEST(ProposeBoxes, BlankImageGivesNothing) {
  BoxProposerConfig cfg;
  EXPECT_TRUE(propose_boxes(constant_image(64, 64, 0.5), cfg).empty());
  EXPECT_TRUE(propose_boxes(constant_image(64, 64, 0.1), cfg).empty());
}

TEST(ProposeBoxes, TwoBlobsGiveTightBoxes) {
  Image img(96, 96, 1, 0.8);
  paint_rect(img, 10, 12, 24, 30, 0.2);   // blob A: bbox (10,12)-(24,30)
  paint_rect(img, 60, 55, 80, 70, 0.25);  // blob B: bbox (60,55)-(80,70)
  BoxProposerConfig cfg;
  cfg.smoothing_sigma = 0.0;  // crisp fixture
  const auto boxes = propose_boxes(img, cfg);
  ASSERT_EQ(boxes.size(), 2u);
  // score sorting may order either way; identify by location
  for (const auto& b : boxes) {
    if (b.x1 < 40) {
      EXPECT_NEAR(b.x1, 10, 2);
      EXPECT_NEAR(b.y1, 12, 2);
      EXPECT_NEAR(b.x2, 25, 2);
      EXPECT_NEAR(b.y2, 31, 2);
    } else {
      EXPECT_NEAR(b.x1, 60, 2);
      EXPECT_NEAR(b.y1, 55, 2);
      EXPECT_NEAR(b.x2, 81, 2);
      EXPECT_NEAR(b.y2, 71, 2);
    }
    EXPECT_GE(b.score, 0.0);
    EXPECT_LE(b.score, 1.0);
  }
}

TEST(ProposeBoxes, MinAreaDropsSpecks) {
  Image img(64, 64, 1, 0.8);
  paint_rect(img, 30, 30, 31, 31, 0.2);  // 4 px blob
  BoxProposerConfig cfg;
  cfg.smoothing_sigma = 0.0;
  cfg.min_area = 20.0;
  EXPECT_TRUE(propose_boxes(img, cfg).empty());
  cfg.min_area = 1.0;
  EXPECT_EQ(propose_boxes(img, cfg).size(), 1u);
}

TEST(ProposeBoxes, BrightOnDarkPolarity) {
  Image img(64, 64, 1, 0.2);
  paint_rect(img, 20, 20, 40, 40, 0.9);
  BoxProposerConfig cfg;
  cfg.smoothing_sigma = 0.0;
  cfg.polarity = BoxProposerConfig::Polarity::BrightOnDark;
  const auto boxes = propose_boxes(img, cfg);
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_NEAR(boxes[0].x1, 20, 2);
  EXPECT_NEAR(boxes[0].x2, 41, 2);
}

TEST(ProposeBoxes, TranslationEquivariance) {
  const int dx = 7, dy = 5;
  Image a(96, 96, 1, 0.75);
  paint_rect(a, 20, 25, 34, 45, 0.2);
  Image b(96, 96, 1, 0.75);
  paint_rect(b, 20 + dx, 25 + dy, 34 + dx, 45 + dy, 0.2);
  BoxProposerConfig cfg;
  const auto boxes_a = propose_boxes(a, cfg);
  const auto boxes_b = propose_boxes(b, cfg);
  ASSERT_EQ(boxes_a.size(), 1u);
  ASSERT_EQ(boxes_b.size(), 1u);
  EXPECT_DOUBLE_EQ(boxes_b[0].x1, boxes_a[0].x1 + dx);
  EXPECT_DOUBLE_EQ(boxes_b[0].y1, boxes_a[0].y1 + dy);
  EXPECT_DOUBLE_EQ(boxes_b[0].x2, boxes_a[0].x2 + dx);
  EXPECT_DOUBLE_EQ(boxes_b[0].y2, boxes_a[0].y2 + dy);
}

TEST(ProposeBoxes, ExternalJsonPassThrough) {
  const auto path = write_temp(
      "currseg_boxes_ok.json",
      R"([{"x1":5,"y1":6,"x2":20,"y2":22,"score":0.9},
          {"x1":30,"y1":30,"x2":40,"y2":44,"score":0.8,"text":"lesion"},
          {"x1":-3,"y1":50,"x2":12,"y2":60,"score":0.7}])");
  BoxProposerConfig cfg;
  cfg.method = BoxProposerConfig::Method::ExternalJson;
  cfg.external_path = path;
  const auto boxes = propose_boxes(constant_image(64, 64, 0.5), cfg);
  ASSERT_EQ(boxes.size(), 3u);
  EXPECT_DOUBLE_EQ(boxes[0].x1, 5);
  EXPECT_DOUBLE_EQ(boxes[1].y2, 44);
  EXPECT_DOUBLE_EQ(boxes[2].x1, 0);  // clamped
  EXPECT_DOUBLE_EQ(boxes[2].score, 0.7);
}

// --- sample_edge_points ---

TEST(SampleEdgePoints, CircleGivesEquallySpacedBoundaryPoints) {
  const int w = 128, h = 128;
  const auto coarse = disk_mask(w, h, 64, 64, 20);
  const auto img = constant_image(w, h, 0.5);
  EdgePointConfig cfg;
  cfg.k = 8;
  cfg.snap_radius = 0.0;
  const auto points = sample_edge_points(coarse, img, cfg);
  ASSERT_EQ(points.size(), 8u);
  std::vector<double> angles;
  for (const auto& p : points) {
    const double rho = std::hypot(p.x - 64, p.y - 64);
    EXPECT_NEAR(rho, 20.0, 1.5);
    EXPECT_EQ(p.label, 0);
    angles.push_back(std::atan2(p.y - 64, p.x - 64));
  }
  for (std::size_t i = 0; i < angles.size(); ++i) {
    double gap = angles[(i + 1) % 8] - angles[i];
    while (gap <= -M_PI) gap += 2 * M_PI;
    while (gap > M_PI) gap -= 2 * M_PI;
    EXPECT_NEAR(std::abs(gap) * 180.0 / M_PI, 45.0, 5.0);
  }
}

TEST(SampleEdgePoints, SinglePointIsTopmostBoundary) {
  const auto coarse = disk_mask(64, 64, 30, 30, 12);
  EdgePointConfig cfg;
  cfg.k = 1;
  cfg.snap_radius = 0.0;
  const auto points = sample_edge_points(coarse, constant_image(64, 64, 0.5), cfg);
  ASSERT_EQ(points.size(), 1u);
  // topmost boundary of the disk: directly above the center
  EXPECT_NEAR(points[0].x, 30.0, 1.0);
  EXPECT_NEAR(points[0].y, 30.0 - 12.0, 1.0);
}

TEST(SampleEdgePoints, SnapRecoversTrueEdge) {
  // coarse circle r=18 but the image's true step edge sits at r=20
  const int w = 128, h = 128;
  const auto img = disk_image(w, h, 64, 64, 20, 0.2, 0.8, 1.5);
  const auto coarse = disk_mask(w, h, 64, 64, 18);
  EdgePointConfig cfg;
  cfg.k = 8;
  cfg.snap_radius = 4.0;
  const auto points = sample_edge_points(coarse, img, cfg);
  ASSERT_EQ(points.size(), 8u);
  for (const auto& p : points)
    EXPECT_NEAR(std::hypot(p.x - 64, p.y - 64), 20.0, 1.5);
}

TEST(SampleEdgePoints, EmptyMaskGivesEmptyList) {
  EXPECT_TRUE(sample_edge_points(BinaryMask(32, 32),
                                 constant_image(32, 32, 0.5), EdgePointConfig{})
                  .empty());
}

TEST(SampleEdgePoints, PerComponentCounts) {
  BinaryMask coarse(96, 96);
  for (int y = 10; y <= 30; ++y)
    for (int x = 10; x <= 30; ++x) coarse.at(x, y) = 1;
  for (int y = 60; y <= 70; ++y)
    for (int x = 50; x <= 85; ++x) coarse.at(x, y) = 1;
  const auto img = constant_image(96, 96, 0.5);
  EdgePointConfig cfg;
  cfg.k = 5;
  cfg.snap_radius = 0.0;
  cfg.per_component = true;
  EXPECT_EQ(sample_edge_points(coarse, img, cfg).size(), 10u);
  cfg.per_component = false;
  EXPECT_EQ(sample_edge_points(coarse, img, cfg).size(), 5u);
}

TEST(SampleEdgePoints, MinPerimeterFiltersSmallContours) {
  BinaryMask coarse(64, 64);
  coarse.at(5, 5) = 1;  // tiny: perimeter ~2.8
  for (int y = 20; y <= 40; ++y)
    for (int x = 20; x <= 40; ++x) coarse.at(x, y) = 1;
  EdgePointConfig cfg;
  cfg.k = 4;
  cfg.snap_radius = 0.0;
  cfg.min_perimeter = 10.0;
  cfg.per_component = true;
  EXPECT_EQ(sample_edge_points(coarse, constant_image(64, 64, 0.5), cfg).size(), 4u);
}

TEST(SampleEdgePoints, PointsStayNearContourAndCarryLabel) {
  const auto img = disk_image(96, 96, 48, 48, 22, 0.3, 0.7, 2.0);
  const auto coarse = disk_mask(96, 96, 48, 48, 20);
  EdgePointConfig cfg;
  cfg.k = 12;
  cfg.snap_radius = 5.0;
  cfg.label = 1;
  const auto points = sample_edge_points(coarse, img, cfg);
  ASSERT_EQ(points.size(), 12u);
  for (const auto& p : points) {
    EXPECT_EQ(p.label, 1);
    // within snap_radius + 1 of the r=20 coarse contour
    EXPECT_NEAR(std::hypot(p.x - 48, p.y - 48), 20.0, cfg.snap_radius + 1.0);
  }
}

TEST(SampleEdgePoints, Deterministic) {
  const auto img = disk_image(96, 96, 48, 48, 22, 0.3, 0.7, 2.0);
  const auto coarse = disk_mask(96, 96, 48, 48, 20);
  EdgePointConfig cfg;
  const auto a = sample_edge_points(coarse, img, cfg);
  const auto b = sample_edge_points(coarse, img, cfg);
  EXPECT_EQ(serialize_points(a), serialize_points(b));
}

// --- sidecar loaders ---

TEST(Sidecar, LoadBoxesWellFormed) {
  const auto path = write_temp(
      "currseg_boxes2.json",
      R"([{"x1":1,"y1":2,"x2":3,"y2":4,"score":0.5},
          {"x1":10,"y1":10,"x2":30,"y2":30,"score":1.0}])");
  const auto boxes = load_boxes_json(path);
  ASSERT_EQ(boxes.size(), 2u);
  EXPECT_DOUBLE_EQ(boxes[1].x2, 30);
}

TEST(Sidecar, EmptyArray) {
  const auto path = write_temp("currseg_boxes_empty.json", "[]");
  EXPECT_TRUE(load_boxes_json(path).empty());
  EXPECT_TRUE(load_points_json(path).empty());
}

TEST(Sidecar, BadLabelIsSchemaError) {
  const auto path =
      write_temp("currseg_points_bad.json", R"([{"x":1,"y":2,"label":3}])");
  EXPECT_THROW(load_points_json(path), SchemaError);
}

TEST(Sidecar, MissingFileIsDataErrorNotSchemaError) {
  try {
    load_points_json("/nonexistent/points.json");
    FAIL();
  } catch (const SchemaError&) {
    FAIL() << "missing file must not be a schema error";
  } catch (const DataError&) {
  }
}

TEST(Sidecar, MissingKeyAndWrongTypeAreSchemaErrors) {
  const auto p1 = write_temp("currseg_points_nokey.json", R"([{"x":1,"label":0}])");
  EXPECT_THROW(load_points_json(p1), SchemaError);
  const auto p2 =
      write_temp("currseg_boxes_str.json", R"([{"x1":"a","y1":2,"x2":3,"y2":4,"score":1}])");
  EXPECT_THROW(load_boxes_json(p2), SchemaError);
  const auto p3 = write_temp("currseg_boxes_obj.json", R"({"x1":1})");
  EXPECT_THROW(load_boxes_json(p3), SchemaError);
}

TEST(Sidecar, StrictBoundsMode) {
  const auto path =
      write_temp("currseg_points_oob.json", R"([{"x":70,"y":10,"label":0}])");
  EXPECT_THROW(load_points_json(path, 64, 64, true), PromptError);
  const auto clamped = load_points_json(path, 64, 64, false);
  ASSERT_EQ(clamped.size(), 1u);
  EXPECT_DOUBLE_EQ(clamped[0].x, 63.0);
}

TEST(Sidecar, DiscoveryConvention) {
  EXPECT_EQ(sidecar_path("/data/images/case_0001.png", "boxes"),
            fs::path("/data/images/case_0001.boxes.json"));
  EXPECT_EQ(sidecar_path("/data/images/case_0001.png", "points"),
            fs::path("/data/images/case_0001.points.json"));
}
