#pragma once

#include <cmath>
#include <vector>

#include "currseg/filters.hpp"
#include "currseg/image.hpp"

namespace currseg {

// Per-stage parameterization of the built-in segmenter. The coarse and fine
// presets play the role of the two stage-specific prompt encoders: the coarse
// stage trusts boxes, the fine stage trusts edge points plus a mask prior.
struct StageProfile {
  double prior_weight = 0.0;        // lambda: pull toward the dense prior
  double box_margin = 5.0;          // px dilation before exterior pixels seed background
  double box_center_seed_radius = 3.0;  // px disk of foreground seeds at each box center
  double point_seed_radius = 2.0;   // px disk of seeds at each point prompt
  double beta = 90.0;               // contrast sensitivity of the edge weights
  double feature_smooth_sigma = 0.0;  // Gaussian blur of the intensity before weights
  double solver_tolerance = 1e-6;   // relative residual target
  int solver_max_iters = 2000;
  double threshold = 0.5;           // binary = soft > threshold

  void validate() const {
    if (prior_weight < 0) throw Error("StageProfile: prior_weight must be >= 0");
    if (box_margin < 0 || box_center_seed_radius < 0 || point_seed_radius < 0)
      throw Error("StageProfile: radii must be >= 0");
    if (beta <= 0) throw Error("StageProfile: beta must be > 0");
    if (!(solver_tolerance > 0 && solver_tolerance < 1))
      throw Error("StageProfile: solver_tolerance must be in (0,1)");
    if (solver_max_iters < 1) throw Error("StageProfile: solver_max_iters must be >= 1");
    if (!(threshold > 0 && threshold < 1))
      throw Error("StageProfile: threshold must be in (0,1)");
    if (feature_smooth_sigma < 0)
      throw Error("StageProfile: feature_smooth_sigma must be >= 0");
  }
};

// Box-driven stage: no prior tether, moderate contrast sensitivity. The
// feature smoothing keeps sensor noise out of the edge weights.
inline StageProfile coarse_profile() {
  StageProfile p;
  p.prior_weight = 0.0;
  p.beta = 500.0;
  p.feature_smooth_sigma = 1.5;
  return p;
}

// Point + mask-prior stage: a light tether to the coarse mask plus much
// sharper contrast sensitivity, so the solve re-places the boundary on the
// strongest intensity transition inside the band the prior leaves open. The
// tether is kept weak (its decay length ~sqrt(1/lambda) spans the band) and
// the point disks small: edge points are surgical markers.
inline StageProfile fine_profile() {
  StageProfile p;
  p.prior_weight = 0.002;
  p.beta = 3000.0;
  p.feature_smooth_sigma = 2.0;
  p.point_seed_radius = 1.0;
  return p;
}

// The reusable per-image precomputation (the segmenter's image embedding):
// 4-neighbor lattice edge weights w_ij = exp(-beta (I_i - I_j)^2) over the
// channel-averaged intensity. Weights are in (0, 1] and symmetric by
// construction; they are computed once per (image, beta) and shared across
// any number of segment calls.
struct ImageFeatures {
  int width = 0;
  int height = 0;
  std::vector<double> horizontal;  // (width-1) * height, (x,y)-(x+1,y)
  std::vector<double> vertical;    // width * (height-1), (x,y)-(x,y+1)

  double weight_h(int x, int y) const {
    return horizontal[static_cast<std::size_t>(y) * (width - 1) + x];
  }
  double weight_v(int x, int y) const {
    return vertical[static_cast<std::size_t>(y) * width + x];
  }
};

inline ImageFeatures precompute_features(const Image& image,
                                         const StageProfile& profile) {
  profile.validate();
  const int w = image.width, h = image.height;
  std::vector<double> gray = filters::gray_field(image);
  if (profile.feature_smooth_sigma > 0)
    gray = filters::gaussian_blur(gray, w, h, profile.feature_smooth_sigma);

  ImageFeatures f;
  f.width = w;
  f.height = h;
  f.horizontal.resize(static_cast<std::size_t>(w > 0 ? w - 1 : 0) * h);
  f.vertical.resize(static_cast<std::size_t>(w) * (h > 0 ? h - 1 : 0));
  auto g = [&](int x, int y) { return gray[static_cast<std::size_t>(y) * w + x]; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x + 1 < w; ++x) {
      const double d = g(x, y) - g(x + 1, y);
      f.horizontal[static_cast<std::size_t>(y) * (w - 1) + x] =
          std::exp(-profile.beta * d * d);
    }
  for (int y = 0; y + 1 < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double d = g(x, y) - g(x, y + 1);
      f.vertical[static_cast<std::size_t>(y) * w + x] =
          std::exp(-profile.beta * d * d);
    }
  return f;
}

}  // namespace currseg
