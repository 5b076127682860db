#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "currseg/dataset.hpp"
#include "currseg/filters.hpp"
#include "currseg/png_io.hpp"
#include "currseg/rng.hpp"

namespace currseg {

// Desk-scale benchmark generator: dark lesions with wavy boundaries
//   r(theta) = r0 * (1 + sum_k a_k cos(k theta + phi_k))
// on a bright background. The ground-truth mask is the crisp rasterization;
// only the rendered intensity gets the edge blur and the noise, so the GT
// stays exact. Generation is a pure function of (spec, count): fixed seeds
// reproduce byte-identical files.
struct SyntheticSpec {
  int width = 128;
  int height = 128;
  int lesions_min = 1;
  int lesions_max = 2;
  double base_radius = 18.0;
  int shape_harmonics = 3;
  double harmonic_amp_min = 0.03;
  double harmonic_amp_max = 0.10;
  double contrast = 0.6;          // intensity gap lesion vs background
  double edge_fuzz_sigma = 3.0;   // px blur of the rendered intensity only
  double noise_sigma = 0.03;      // additive Gaussian, intensity units
  double min_separation = 10.0;   // px between lesion boundary circles
  double background_intensity = 0.75;
  std::uint64_t rng_seed = 20240901;

  void validate() const {
    if (width < 8 || height < 8)
      throw ConfigError("SyntheticSpec: width/height must be >= 8");
    if (lesions_min < 0 || lesions_min > lesions_max)
      throw ConfigError("SyntheticSpec: need 0 <= lesions_min <= lesions_max");
    if (base_radius < 2)
      throw ConfigError("SyntheticSpec: base_radius must be >= 2");
    if (shape_harmonics < 0)
      throw ConfigError("SyntheticSpec: shape_harmonics must be >= 0");
    if (harmonic_amp_min < 0 || harmonic_amp_min > harmonic_amp_max)
      throw ConfigError("SyntheticSpec: bad harmonic amplitude range");
    if (shape_harmonics * harmonic_amp_max >= 0.95)
      throw ConfigError(
          "SyntheticSpec: harmonic amplitudes too large, r(theta) could reach 0");
    if (!(contrast > 0 && contrast <= 1))
      throw ConfigError("SyntheticSpec: contrast must be in (0,1]");
    if (edge_fuzz_sigma < 0 || noise_sigma < 0 || min_separation < 0)
      throw ConfigError("SyntheticSpec: sigmas and min_separation must be >= 0");
    if (!(background_intensity > 0 && background_intensity <= 1))
      throw ConfigError("SyntheticSpec: background_intensity must be in (0,1]");
  }
};

namespace detail {

struct LesionShape {
  double cx, cy, r0;
  std::vector<double> amps, phases;

  double radius(double theta) const {
    double r = 1.0;
    for (std::size_t k = 0; k < amps.size(); ++k)
      r += amps[k] * std::cos((static_cast<double>(k) + 1.0) * theta + phases[k]);
    return r0 * r;
  }
  double max_radius() const {
    double a = 0.0;
    for (double v : amps) a += v;
    return r0 * (1.0 + a);
  }
};

inline bool inside_any(const std::vector<LesionShape>& shapes, double x, double y) {
  for (const auto& s : shapes) {
    const double dx = x - s.cx, dy = y - s.cy;
    const double rho = std::hypot(dx, dy);
    if (rho <= s.radius(std::atan2(dy, dx))) return true;
  }
  return false;
}

// Draws the shape set for one image. Shape parameters are drawn once and
// kept fixed; placement is rejection-sampled, restarting the whole layout
// when a lesion runs out of room so an unlucky first placement cannot strand
// the rest.
inline std::vector<LesionShape> place_lesions(const SyntheticSpec& spec, Rng& rng) {
  const int n = rng.uniform_int(spec.lesions_min, spec.lesions_max);
  std::vector<LesionShape> shapes(static_cast<std::size_t>(n));
  for (auto& s : shapes) {
    s.r0 = spec.base_radius * rng.uniform(0.75, 1.25);
    for (int k = 0; k < spec.shape_harmonics; ++k) {
      s.amps.push_back(rng.uniform(spec.harmonic_amp_min, spec.harmonic_amp_max));
      s.phases.push_back(rng.uniform(0.0, 6.283185307179586));
    }
    const double margin = s.max_radius() + 2.0;
    if (spec.width - 1 - margin <= margin || spec.height - 1 - margin <= margin)
      throw ConfigError(
          "generate_synthetic: base_radius too large for the image size");
  }

  for (int round = 0; round < 100; ++round) {
    bool all_placed = true;
    for (std::size_t lesion = 0; lesion < shapes.size() && all_placed; ++lesion) {
      LesionShape& s = shapes[lesion];
      const double rmax = s.max_radius();
      const double margin = rmax + 2.0;
      bool placed = false;
      for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
        s.cx = rng.uniform(margin, spec.width - 1 - margin);
        s.cy = rng.uniform(margin, spec.height - 1 - margin);
        placed = true;
        for (std::size_t other = 0; other < lesion; ++other) {
          const double need =
              rmax + shapes[other].max_radius() + spec.min_separation;
          if (std::hypot(s.cx - shapes[other].cx, s.cy - shapes[other].cy) < need) {
            placed = false;
            break;
          }
        }
      }
      all_placed = placed;
    }
    if (all_placed) return shapes;
  }
  throw ConfigError(
      "generate_synthetic: cannot place " + std::to_string(n) +
      " lesions with min_separation=" + std::to_string(spec.min_separation) +
      "; reduce lesions_max, min_separation or base_radius");
}

}  // namespace detail

// Renders one (image, ground truth) pair from the per-image substream.
inline std::pair<Image, BinaryMask> render_synthetic(const SyntheticSpec& spec,
                                                     std::uint64_t index) {
  spec.validate();
  Rng rng = Rng::substream(spec.rng_seed, index);
  const auto shapes = detail::place_lesions(spec, rng);

  const int w = spec.width, h = spec.height;
  BinaryMask gt(w, h);
  std::vector<double> field(static_cast<std::size_t>(w) * h,
                            spec.background_intensity);
  const double lesion_intensity =
      std::max(0.0, spec.background_intensity - spec.contrast);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (detail::inside_any(shapes, x, y)) {
        gt.at(x, y) = 1;
        field[static_cast<std::size_t>(y) * w + x] = lesion_intensity;
      }

  field = filters::gaussian_blur(field, w, h, spec.edge_fuzz_sigma);
  Image image(w, h, 1);
  for (std::size_t i = 0; i < field.size(); ++i)
    image.pixels[i] =
        std::clamp(field[i] + spec.noise_sigma * rng.normal(), 0.0, 1.0);
  return {std::move(image), std::move(gt)};
}

// Writes `count` image/mask pairs under out_dir/images and out_dir/masks.
inline Dataset generate_synthetic(const SyntheticSpec& spec, int count,
                                  const std::filesystem::path& out_dir) {
  spec.validate();
  if (count < 0) throw ConfigError("generate_synthetic: count must be >= 0");
  Dataset dataset;
  dataset.split = out_dir.filename().string();

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  std::filesystem::create_directories(out_dir / "masks", ec);
  if (ec)
    throw DataError("generate_synthetic: cannot create output directories under " +
                    out_dir.string() + ": " + ec.message());

  for (int i = 0; i < count; ++i) {
    auto [image, gt] = render_synthetic(spec, static_cast<std::uint64_t>(i));
    char name[32];
    std::snprintf(name, sizeof(name), "case_%04d.png", i);
    DatasetEntry entry;
    entry.id = std::filesystem::path(name).stem().string();
    entry.image_path = out_dir / "images" / name;
    entry.mask_path = out_dir / "masks" / name;
    save_image_png(entry.image_path, image);
    save_mask_png(entry.mask_path, gt);
    dataset.entries.push_back(std::move(entry));
  }
  return dataset;
}

}  // namespace currseg
