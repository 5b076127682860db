#pragma once

#include <algorithm>
#include <cmath>

#include "currseg/image.hpp"

namespace currseg {

// Smoothed Dice loss: 1 - (2 Σ p·g + smooth) / (Σ p + Σ g + smooth).
// With smooth = 0 and an all-empty pair the ratio degenerates to 0/0; the
// perfect-match limit (loss 0) is returned in that case.
inline double dice_loss(const SoftMask& pred, const BinaryMask& gt,
                        double smooth = 1.0) {
  require_same_size(pred, gt, "dice_loss");
  if (smooth < 0.0) throw Error("dice_loss: smooth must be >= 0");
  double inter = 0.0, psum = 0.0, gsum = 0.0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double p = pred.values[i];
    const double g = gt.bits[i] ? 1.0 : 0.0;
    inter += p * g;
    psum += p;
    gsum += g;
  }
  const double denom = psum + gsum + smooth;
  if (denom == 0.0) return 0.0;
  return 1.0 - (2.0 * inter + smooth) / denom;
}

// Mean binary cross-entropy. Predictions are clamped to
// [clamp_eps, 1 - clamp_eps] before the logs, so the result is always finite.
inline double bce_loss(const SoftMask& pred, const BinaryMask& gt,
                       double clamp_eps = 1e-7) {
  require_same_size(pred, gt, "bce_loss");
  if (!(clamp_eps > 0.0 && clamp_eps < 0.5))
    throw Error("bce_loss: clamp_eps must be in (0, 0.5)");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double p = std::clamp(pred.values[i], clamp_eps, 1.0 - clamp_eps);
    const double g = gt.bits[i] ? 1.0 : 0.0;
    total += -(g * std::log(p) + (1.0 - g) * std::log(1.0 - p));
  }
  return total / static_cast<double>(pred.values.size());
}

// Per-pixel analytic gradient of bce_loss w.r.t. the prediction:
// (p - g) / (p (1 - p)) / N. Valid where the clamp is inactive.
inline std::vector<double> bce_gradient(const SoftMask& pred,
                                        const BinaryMask& gt,
                                        double clamp_eps = 1e-7) {
  require_same_size(pred, gt, "bce_gradient");
  std::vector<double> grad(pred.values.size());
  const double n = static_cast<double>(pred.values.size());
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double p = std::clamp(pred.values[i], clamp_eps, 1.0 - clamp_eps);
    const double g = gt.bits[i] ? 1.0 : 0.0;
    grad[i] = (p - g) / (p * (1.0 - p)) / n;
  }
  return grad;
}

}  // namespace currseg
