#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "currseg/image.hpp"

namespace currseg {

// Scalar-field helpers shared by the box proposer, the feature builder and
// the synthetic generator. Fields are row-major W*H doubles; borders are
// handled by reflection.

namespace filters {

inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

inline int reflect(int i, int n) {
  // 2,1,0,1,2 ... mirror without repeating the border sample
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

// Separable Gaussian blur; sigma <= 0 returns the input unchanged.
inline std::vector<double> gaussian_blur(const std::vector<double>& field,
                                         int width, int height, double sigma) {
  if (sigma <= 0.0) return field;
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  std::vector<double> tmp(field.size()), out(field.size());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t)
        acc += kernel[t + radius] *
               field[static_cast<std::size_t>(y) * width + reflect(x + t, width)];
      tmp[static_cast<std::size_t>(y) * width + x] = acc;
    }
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t)
        acc += kernel[t + radius] *
               tmp[static_cast<std::size_t>(reflect(y + t, height)) * width + x];
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  return out;
}

inline std::vector<double> gray_field(const Image& image) {
  std::vector<double> g(image.pixel_count());
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      g[static_cast<std::size_t>(y) * image.width + x] = image.gray(x, y);
  return g;
}

// Central-difference gradient magnitude (one-sided at borders).
inline std::vector<double> gradient_magnitude(const std::vector<double>& field,
                                              int width, int height) {
  std::vector<double> mag(field.size());
  auto v = [&](int x, int y) {
    return field[static_cast<std::size_t>(y) * width + x];
  };
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const int xm = std::max(0, x - 1), xp = std::min(width - 1, x + 1);
      const int ym = std::max(0, y - 1), yp = std::min(height - 1, y + 1);
      const double gx = (v(xp, y) - v(xm, y)) / (xp - xm);
      const double gy = (v(x, yp) - v(x, ym)) / (yp - ym);
      mag[static_cast<std::size_t>(y) * width + x] = std::hypot(gx, gy);
    }
  return mag;
}

// Bilinear sample with clamping to the border.
inline double sample_bilinear(const std::vector<double>& field, int width,
                              int height, double x, double y) {
  x = std::clamp(x, 0.0, width - 1.0);
  y = std::clamp(y, 0.0, height - 1.0);
  const int x0 = std::min(static_cast<int>(x), width - 2 >= 0 ? width - 2 : 0);
  const int y0 = std::min(static_cast<int>(y), height - 2 >= 0 ? height - 2 : 0);
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = x - x0, fy = y - y0;
  auto v = [&](int xx, int yy) {
    return field[static_cast<std::size_t>(yy) * width + xx];
  };
  return v(x0, y0) * (1 - fx) * (1 - fy) + v(x1, y0) * fx * (1 - fy) +
         v(x0, y1) * (1 - fx) * fy + v(x1, y1) * fx * fy;
}

// Otsu's threshold over a 256-bin histogram of values assumed in [0, 1].
inline double otsu_threshold(const std::vector<double>& field) {
  std::array<std::size_t, 256> hist{};
  for (double v : field) {
    int bin = static_cast<int>(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
    ++hist[static_cast<std::size_t>(bin)];
  }
  const double total = static_cast<double>(field.size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * static_cast<double>(hist[i]);
  double sum_bg = 0.0, weight_bg = 0.0, best_var = -1.0;
  int best_bin = 127;
  for (int t = 0; t < 256; ++t) {
    weight_bg += static_cast<double>(hist[t]);
    if (weight_bg == 0.0) continue;
    const double weight_fg = total - weight_bg;
    if (weight_fg == 0.0) break;
    sum_bg += t * static_cast<double>(hist[t]);
    const double mean_bg = sum_bg / weight_bg;
    const double mean_fg = (sum_all - sum_bg) / weight_fg;
    const double between = weight_bg * weight_fg * (mean_bg - mean_fg) * (mean_bg - mean_fg);
    if (between > best_var) {
      best_var = between;
      best_bin = t;
    }
  }
  return (best_bin + 0.5) / 255.0;
}

// 4-connected component labeling. Labels start at 1; 0 is background.
// Returns the label raster and sets `count` to the number of components.
inline std::vector<int> label_components(const BinaryMask& mask, int& count) {
  std::vector<int> labels(mask.bits.size(), 0);
  std::vector<std::size_t> stack;
  count = 0;
  for (std::size_t start = 0; start < mask.bits.size(); ++start) {
    if (!mask.bits[start] || labels[start]) continue;
    ++count;
    labels[start] = count;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(i % mask.width);
      const int y = static_cast<int>(i / mask.width);
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (!mask.in_bounds(nx[k], ny[k])) continue;
        const std::size_t j =
            static_cast<std::size_t>(ny[k]) * mask.width + nx[k];
        if (mask.bits[j] && !labels[j]) {
          labels[j] = count;
          stack.push_back(j);
        }
      }
    }
  }
  return labels;
}

}  // namespace filters
}  // namespace currseg
