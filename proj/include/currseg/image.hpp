#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "currseg/errors.hpp"

namespace currseg {

// Row-major intensity raster, 1 or 3 channels, values normalized to [0, 1].
// Pixel centers sit on the integer lattice: pixel (x, y) is the point (x, y).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> pixels;  // size = width * height * channels

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c),
        pixels(static_cast<std::size_t>(w) * h * c, fill) {}

  double& at(int x, int y, int c = 0) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  // Channel-averaged intensity.
  double gray(int x, int y) const {
    if (channels == 1) return at(x, y);
    double s = 0.0;
    for (int c = 0; c < channels; ++c) s += at(x, y, c);
    return s / channels;
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }

  void validate() const {
    if (width < 1 || height < 1)
      throw DimensionError("Image: width and height must be >= 1");
    if (channels != 1 && channels != 3)
      throw DimensionError("Image: channels must be 1 or 3");
    if (pixels.size() != static_cast<std::size_t>(width) * height * channels)
      throw DimensionError("Image: pixel buffer size mismatch");
    for (double v : pixels)
      if (!(v >= 0.0 && v <= 1.0))
        throw Error("Image: intensity outside [0,1]");
  }
};

// Row-major boolean raster.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // 0 or 1

  BinaryMask() = default;
  BinaryMask(int w, int h, bool fill = false)
      : width(w), height(h),
        bits(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

  std::uint8_t& at(int x, int y) {
    return bits[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t at(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * width + x];
  }

  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b != 0;
    return n;
  }

  bool same_size(const BinaryMask& o) const {
    return width == o.width && height == o.height;
  }
};

// Row-major scalar raster with values in [0, 1].
struct SoftMask {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  SoftMask() = default;
  SoftMask(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }

  void validate() const {
    if (values.size() != static_cast<std::size_t>(width) * height)
      throw DimensionError("SoftMask: buffer size mismatch");
    for (double v : values)
      if (!(v >= 0.0 && v <= 1.0))
        throw Error("SoftMask: value outside [0,1]");
  }
};

inline void require_same_size(const BinaryMask& a, const BinaryMask& b,
                              const char* where) {
  if (!a.same_size(b))
    throw DimensionError(std::string(where) + ": mask dimensions differ (" +
                         std::to_string(a.width) + "x" + std::to_string(a.height) +
                         " vs " + std::to_string(b.width) + "x" +
                         std::to_string(b.height) + ")");
}

inline void require_same_size(const SoftMask& a, const BinaryMask& b,
                              const char* where) {
  if (a.width != b.width || a.height != b.height)
    throw DimensionError(std::string(where) + ": dimensions differ (" +
                         std::to_string(a.width) + "x" + std::to_string(a.height) +
                         " vs " + std::to_string(b.width) + "x" +
                         std::to_string(b.height) + ")");
}

// Pixelwise soft > t.
inline BinaryMask threshold(const SoftMask& soft, double t) {
  if (!(t > 0.0 && t < 1.0))
    throw Error("threshold: t must be in (0,1)");
  BinaryMask out(soft.width, soft.height);
  for (std::size_t i = 0; i < soft.values.size(); ++i)
    out.bits[i] = soft.values[i] > t ? 1 : 0;
  return out;
}

// Pixelwise OR of a nonempty list of equally sized masks.
inline BinaryMask mask_union(const std::vector<BinaryMask>& masks) {
  if (masks.empty()) throw Error("mask_union: empty mask list");
  BinaryMask out = masks.front();
  for (std::size_t m = 1; m < masks.size(); ++m) {
    require_same_size(out, masks[m], "mask_union");
    for (std::size_t i = 0; i < out.bits.size(); ++i)
      out.bits[i] |= masks[m].bits[i];
  }
  return out;
}

}  // namespace currseg
