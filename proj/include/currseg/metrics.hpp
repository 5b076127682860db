#pragma once

#include "currseg/image.hpp"

namespace currseg {

// Dice and IoU of one mask pair. iou <= dice always holds, since
// dice = 2*iou / (1 + iou).
struct MetricsRecord {
  double dice = 0.0;
  double iou = 0.0;
};

namespace detail {

struct OverlapCounts {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t inter = 0;
};

inline OverlapCounts overlap_counts(const BinaryMask& a, const BinaryMask& b,
                                    const char* where) {
  require_same_size(a, b, where);
  OverlapCounts c;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    const bool pa = a.bits[i] != 0;
    const bool pb = b.bits[i] != 0;
    c.a += pa;
    c.b += pb;
    c.inter += pa && pb;
  }
  return c;
}

}  // namespace detail

// 2|A∩B| / (|A|+|B|). Two empty masks compare as a perfect match (1.0).
inline double dice(const BinaryMask& a, const BinaryMask& b) {
  const auto c = detail::overlap_counts(a, b, "dice");
  if (c.a + c.b == 0) return 1.0;
  return 2.0 * static_cast<double>(c.inter) / static_cast<double>(c.a + c.b);
}

// |A∩B| / |A∪B|. Two empty masks compare as 1.0.
inline double iou(const BinaryMask& a, const BinaryMask& b) {
  const auto c = detail::overlap_counts(a, b, "iou");
  const std::size_t uni = c.a + c.b - c.inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(c.inter) / static_cast<double>(uni);
}

// Both metrics in one pass over the pair.
inline MetricsRecord metrics(const BinaryMask& a, const BinaryMask& b) {
  const auto c = detail::overlap_counts(a, b, "metrics");
  MetricsRecord r;
  const std::size_t uni = c.a + c.b - c.inter;
  r.dice = (c.a + c.b == 0)
               ? 1.0
               : 2.0 * static_cast<double>(c.inter) / static_cast<double>(c.a + c.b);
  r.iou = (uni == 0) ? 1.0 : static_cast<double>(c.inter) / static_cast<double>(uni);
  return r;
}

}  // namespace currseg
