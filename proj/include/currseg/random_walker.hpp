#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "currseg/features.hpp"
#include "currseg/prompts.hpp"

namespace currseg {

// Output of one segmenter call: the per-pixel potential, its thresholded
// binary mask, and how the solve went. `converged` is false when the solver
// hit its iteration budget before reaching the residual target; the result
// is still usable and carries the achieved residual.
struct SegmentationResult {
  SoftMask soft;
  BinaryMask binary;
  int solver_iters = 0;
  double solver_residual = 0.0;
  bool converged = true;
};

namespace walker {

constexpr std::int8_t kUnseeded = -1;
constexpr std::int8_t kBackground = 0;
constexpr std::int8_t kForeground = 1;

namespace detail {

inline void stamp_disk(std::vector<std::uint8_t>& grid, int w, int h, double cx,
                       double cy, double radius) {
  const int x0 = std::max(0, static_cast<int>(std::ceil(cx - radius)));
  const int x1 = std::min(w - 1, static_cast<int>(std::floor(cx + radius)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(cy - radius)));
  const int y1 = std::min(h - 1, static_cast<int>(std::floor(cy + radius)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius)
        grid[static_cast<std::size_t>(y) * w + x] = 1;
  // radius below the pixel pitch still seeds the nearest pixel
  const int nx = std::clamp(static_cast<int>(std::lround(cx)), 0, w - 1);
  const int ny = std::clamp(static_cast<int>(std::lround(cy)), 0, h - 1);
  grid[static_cast<std::size_t>(ny) * w + nx] = 1;
}

}  // namespace detail

// Hard-seed construction from a prompt bundle:
//   - with boxes: everything outside the union of margin-dilated boxes seeds
//     background, and a small disk at each box center seeds foreground (a
//     lone box must segment the enclosed object);
//   - each point seeds a disk with its own label;
//   - with no box and no positive point but a dense prior, the confident
//     prior levels (> 0.9 / < 0.1) seed foreground / background;
//   - conflicts resolve to background: negative prompts dominate.
inline std::vector<std::int8_t> build_seeds(int w, int h,
                                            const PromptBundle& bundle,
                                            const StageProfile& profile) {
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<std::uint8_t> fg(n, 0), bg(n, 0);

  if (!bundle.boxes.empty()) {
    std::vector<std::uint8_t> inside(n, 0);
    for (const auto& raw : bundle.boxes) {
      const BoxPrompt box = clamp_box(raw, w, h);
      const int x0 = std::max(
          0, static_cast<int>(std::ceil(box.x1 - profile.box_margin)));
      const int x1 = std::min(
          w - 1, static_cast<int>(std::floor(box.x2 + profile.box_margin)));
      const int y0 = std::max(
          0, static_cast<int>(std::ceil(box.y1 - profile.box_margin)));
      const int y1 = std::min(
          h - 1, static_cast<int>(std::floor(box.y2 + profile.box_margin)));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
          inside[static_cast<std::size_t>(y) * w + x] = 1;
      detail::stamp_disk(fg, w, h, 0.5 * (box.x1 + box.x2),
                         0.5 * (box.y1 + box.y2), profile.box_center_seed_radius);
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!inside[i]) bg[i] = 1;
  }

  bool has_positive_point = false;
  for (const auto& p : bundle.points) {
    if (p.label == 1) has_positive_point = true;
    detail::stamp_disk(p.label == 1 ? fg : bg, w, h, p.x, p.y,
                       profile.point_seed_radius);
  }

  if (bundle.boxes.empty() && !has_positive_point && bundle.dense_prior) {
    const SoftMask& prior = *bundle.dense_prior;
    for (std::size_t i = 0; i < n; ++i) {
      if (prior.values[i] > 0.9) fg[i] = 1;
      if (prior.values[i] < 0.1) bg[i] = 1;
    }
  }

  std::vector<std::int8_t> seeds(n, kUnseeded);
  for (std::size_t i = 0; i < n; ++i) {
    if (bg[i])
      seeds[i] = kBackground;  // background wins conflicts
    else if (fg[i])
      seeds[i] = kForeground;
  }
  return seeds;
}

struct RawSolution {
  std::vector<double> potential;  // seed values at seeds, solved elsewhere
  int iters = 0;
  double residual = 0.0;
  bool converged = true;
};

// Solves the screened Laplace system on the unseeded pixels:
//   sum_j w_ij (u_i - u_j) + lambda (u_i - m_i) = 0,
// with seeded pixels as Dirichlet constraints, by Jacobi-preconditioned
// conjugate gradients (single-threaded, fixed order: deterministic).
//
// The exact solution provably lies between the smallest and largest
// constraint values (seeds, plus the prior where lambda > 0); the returned
// solution is projected onto that interval, which can only move it closer to
// the exact one. The reported residual is recomputed after projection, so a
// converged solve satisfies ||b - Ax|| <= tol * ||b|| as returned.
inline RawSolution solve_screened_laplace(const ImageFeatures& f,
                                          const std::vector<std::int8_t>& seeds,
                                          const SoftMask* prior, double lambda,
                                          double tol, int max_iters) {
  const int w = f.width, h = f.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const double lam = (prior != nullptr && lambda > 0) ? lambda : 0.0;

  RawSolution out;
  out.potential.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (seeds[i] != kUnseeded) out.potential[i] = seeds[i];

  std::vector<std::int64_t> index(n, -1);
  std::int64_t m = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (seeds[i] == kUnseeded) index[i] = m++;
  if (m == 0) return out;  // fully seeded

  bool any_seed = false;
  double lo = 1.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (seeds[i] != kUnseeded) {
      any_seed = true;
      lo = std::min(lo, static_cast<double>(seeds[i]));
      hi = std::max(hi, static_cast<double>(seeds[i]));
    }
  if (lam > 0) {
    for (std::size_t i = 0; i < n; ++i)
      if (seeds[i] == kUnseeded) {
        lo = std::min(lo, prior->values[i]);
        hi = std::max(hi, prior->values[i]);
      }
  } else if (!any_seed) {
    // Unconstrained system (prior-only bundle with no confident levels and
    // no tether): any constant solves it. Hand the prior back unchanged.
    if (prior != nullptr) out.potential = prior->values;
    return out;
  }

  // Assemble CSR over the unknowns plus diagonal and right-hand side.
  const std::size_t mu = static_cast<std::size_t>(m);
  std::vector<double> diag(mu, lam), b(mu, 0.0);
  std::vector<std::int64_t> row_ptr(mu + 1, 0);
  std::vector<std::int64_t> col;
  std::vector<double> val;
  col.reserve(mu * 4);
  val.reserve(mu * 4);

  auto for_each_neighbor = [&](int x, int y, auto&& fn) {
    if (x > 0) fn(x - 1, y, f.weight_h(x - 1, y));
    if (x + 1 < w) fn(x + 1, y, f.weight_h(x, y));
    if (y > 0) fn(x, y - 1, f.weight_v(x, y - 1));
    if (y + 1 < h) fn(x, y + 1, f.weight_v(x, y));
  };

  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (seeds[i] != kUnseeded) continue;
      const std::size_t k = static_cast<std::size_t>(index[i]);
      if (lam > 0) b[k] += lam * prior->values[i];
      for_each_neighbor(x, y, [&](int nx, int ny, double weight) {
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        diag[k] += weight;
        if (seeds[j] != kUnseeded) {
          b[k] += weight * seeds[j];
        } else {
          col.push_back(index[j]);
          val.push_back(-weight);
        }
      });
      row_ptr[k + 1] = static_cast<std::int64_t>(col.size());
    }

  auto apply = [&](const std::vector<double>& x_in, std::vector<double>& y_out) {
    for (std::size_t k = 0; k < mu; ++k) {
      double acc = diag[k] * x_in[k];
      for (std::int64_t t = row_ptr[k]; t < row_ptr[k + 1]; ++t)
        acc += val[static_cast<std::size_t>(t)] *
               x_in[static_cast<std::size_t>(col[static_cast<std::size_t>(t)])];
      y_out[k] = acc;
    }
  };
  auto dot = [](const std::vector<double>& a, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * c[k];
    return s;
  };

  const double bnorm = std::sqrt(dot(b, b));
  std::vector<double> x(mu, 0.0);

  if (bnorm > 0.0) {
    std::vector<double> r = b, z(mu), p(mu), ap(mu);
    for (std::size_t k = 0; k < mu; ++k) z[k] = r[k] / diag[k];
    p = z;
    double rz = dot(r, z);
    int iters = 0;
    bool done = false;
    // Inner CG aims below the target so the projection-and-recheck loop
    // normally passes first try; on a miss it restarts from the projected
    // iterate with the remaining budget.
    while (!done) {
      const double inner_target = 0.5 * tol * bnorm;
      const int iters_at_entry = iters;
      while (iters < max_iters) {
        apply(p, ap);
        const double pap = dot(p, ap);
        if (pap <= 0.0) break;  // numerically exhausted
        const double alpha = rz / pap;
        for (std::size_t k = 0; k < mu; ++k) x[k] += alpha * p[k];
        for (std::size_t k = 0; k < mu; ++k) r[k] -= alpha * ap[k];
        ++iters;
        if (std::sqrt(dot(r, r)) <= inner_target) break;
        for (std::size_t k = 0; k < mu; ++k) z[k] = r[k] / diag[k];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < mu; ++k) p[k] = z[k] + beta * p[k];
      }
      for (std::size_t k = 0; k < mu; ++k) x[k] = std::clamp(x[k], lo, hi);
      apply(x, ap);
      for (std::size_t k = 0; k < mu; ++k) r[k] = b[k] - ap[k];
      out.residual = std::sqrt(dot(r, r)) / bnorm;
      out.iters = iters;
      if (out.residual <= tol) {
        done = true;
      } else if (iters >= max_iters || iters == iters_at_entry) {
        out.converged = false;
        done = true;
      } else {
        for (std::size_t k = 0; k < mu; ++k) z[k] = r[k] / diag[k];
        p = z;
        rz = dot(r, z);
      }
    }
  } else {
    // Zero right-hand side: x = 0 is exact.
    const double v = std::clamp(0.0, lo, hi);
    x.assign(mu, v);
  }

  for (std::size_t i = 0; i < n; ++i)
    if (seeds[i] == kUnseeded)
      out.potential[i] = x[static_cast<std::size_t>(index[i])];
  return out;
}

}  // namespace walker

// One segmenter call against precomputed features. Deterministic: identical
// features, prompts and profile give bit-identical results.
inline SegmentationResult segment(const ImageFeatures& features,
                                  const PromptBundle& prompts,
                                  const StageProfile& profile) {
  profile.validate();
  validate_bundle(prompts, features.width, features.height);

  const auto seeds =
      walker::build_seeds(features.width, features.height, prompts, profile);
  const SoftMask* prior =
      prompts.dense_prior ? &*prompts.dense_prior : nullptr;
  auto solution = walker::solve_screened_laplace(
      features, seeds, prior, profile.prior_weight, profile.solver_tolerance,
      profile.solver_max_iters);

  SegmentationResult result;
  result.soft.width = features.width;
  result.soft.height = features.height;
  result.soft.values = std::move(solution.potential);
  for (double& v : result.soft.values) v = std::clamp(v, 0.0, 1.0);
  result.binary = threshold(result.soft, profile.threshold);
  result.solver_iters = solution.iters;
  result.solver_residual = solution.residual;
  result.converged = solution.converged;
  return result;
}

}  // namespace currseg
