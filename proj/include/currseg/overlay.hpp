#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "currseg/curriculum.hpp"
#include "currseg/png_io.hpp"

namespace currseg {

// Stage-by-stage visualization: one horizontal strip of panels
//   [ original | stage 1 ... stage n | ground truth? ]
// with masks tinted, stage boxes outlined, and point prompts marked in the
// label color (red = negative 0, green = positive 1).

namespace detail {

struct Rgb {
  std::uint8_t r, g, b;
};

constexpr Rgb kMaskTint{70, 130, 220};
constexpr Rgb kGtTint{60, 180, 90};
constexpr Rgb kBoxColor{255, 215, 0};
constexpr Rgb kNegPoint{220, 40, 40};
constexpr Rgb kPosPoint{40, 200, 60};

class Canvas {
 public:
  Canvas(int width, int height) : w_(width), h_(height) {
    raster_.width = width;
    raster_.height = height;
    raster_.channels = 3;
    raster_.bytes.assign(static_cast<std::size_t>(width) * height * 3, 0);
  }

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    const std::size_t i = (static_cast<std::size_t>(y) * w_ + x) * 3;
    raster_.bytes[i] = c.r;
    raster_.bytes[i + 1] = c.g;
    raster_.bytes[i + 2] = c.b;
  }

  void blend(int x, int y, Rgb c, double alpha) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    const std::size_t i = (static_cast<std::size_t>(y) * w_ + x) * 3;
    raster_.bytes[i] = static_cast<std::uint8_t>(raster_.bytes[i] * (1 - alpha) + c.r * alpha);
    raster_.bytes[i + 1] = static_cast<std::uint8_t>(raster_.bytes[i + 1] * (1 - alpha) + c.g * alpha);
    raster_.bytes[i + 2] = static_cast<std::uint8_t>(raster_.bytes[i + 2] * (1 - alpha) + c.b * alpha);
  }

  void paste_image(int x0, const Image& image) {
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x) {
        Rgb c;
        if (image.channels == 3) {
          c = {static_cast<std::uint8_t>(std::lround(image.at(x, y, 0) * 255)),
               static_cast<std::uint8_t>(std::lround(image.at(x, y, 1) * 255)),
               static_cast<std::uint8_t>(std::lround(image.at(x, y, 2) * 255))};
        } else {
          const auto g = static_cast<std::uint8_t>(std::lround(image.at(x, y) * 255));
          c = {g, g, g};
        }
        set(x0 + x, y, c);
      }
  }

  void tint_mask(int x0, const BinaryMask& mask, Rgb c, double alpha) {
    for (int y = 0; y < mask.height; ++y)
      for (int x = 0; x < mask.width; ++x)
        if (mask.at(x, y)) blend(x0 + x, y, c, alpha);
  }

  void draw_box(int x0, const BoxPrompt& box, Rgb c) {
    const int bx1 = static_cast<int>(std::lround(box.x1));
    const int by1 = static_cast<int>(std::lround(box.y1));
    const int bx2 = static_cast<int>(std::lround(box.x2));
    const int by2 = static_cast<int>(std::lround(box.y2));
    for (int x = bx1; x <= bx2; ++x) {
      set(x0 + x, by1, c);
      set(x0 + x, by2, c);
    }
    for (int y = by1; y <= by2; ++y) {
      set(x0 + bx1, y, c);
      set(x0 + bx2, y, c);
    }
  }

  void draw_point(int x0, const PointPrompt& p) {
    const Rgb c = p.label == 0 ? kNegPoint : kPosPoint;
    const int px = static_cast<int>(std::lround(p.x));
    const int py = static_cast<int>(std::lround(p.y));
    for (int d = -2; d <= 2; ++d) {
      set(x0 + px + d, py, c);
      set(x0 + px, py + d, c);
    }
  }

  const png::Raster& raster() const { return raster_; }

 private:
  int w_, h_;
  png::Raster raster_;
};

}  // namespace detail

inline void render_overlay(const Image& image,
                           const std::vector<StageTrace>& stages,
                           const std::filesystem::path& out_path,
                           const BinaryMask* gt = nullptr) {
  if (stages.empty()) throw Error("render_overlay: no stages to draw");
  const int panels = 1 + static_cast<int>(stages.size()) + (gt ? 1 : 0);
  detail::Canvas canvas(image.width * panels, image.height);

  canvas.paste_image(0, image);
  int panel = 1;
  for (const auto& stage : stages) {
    const int x0 = panel * image.width;
    canvas.paste_image(x0, image);
    canvas.tint_mask(x0, stage.result.binary, detail::kMaskTint, 0.45);
    for (const auto& box : stage.prompts_used.boxes)
      canvas.draw_box(x0, box, detail::kBoxColor);
    for (const auto& p : stage.prompts_used.points) canvas.draw_point(x0, p);
    ++panel;
  }
  if (gt) {
    const int x0 = panel * image.width;
    canvas.paste_image(x0, image);
    canvas.tint_mask(x0, *gt, detail::kGtTint, 0.45);
  }
  png::write_file(out_path, canvas.raster());
}

}  // namespace currseg
