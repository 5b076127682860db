#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "currseg/losses.hpp"
#include "currseg/metrics.hpp"

using namespace currseg;

namespace {

BinaryMask make_mask(int w, int h, std::initializer_list<std::pair<int, int>> fg) {
  BinaryMask m(w, h);
  for (auto [x, y] : fg) m.at(x, y) = 1;
  return m;
}

BinaryMask random_mask(int w, int h, std::mt19937& rng, double density) {
  BinaryMask m(w, h);
  std::bernoulli_distribution coin(density);
  for (auto& b : m.bits) b = coin(rng) ? 1 : 0;
  return m;
}

}  // namespace

TEST(Dice, IdenticalMasks) {
  const auto a = make_mask(4, 4, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  EXPECT_DOUBLE_EQ(dice(a, a), 1.0);
}

TEST(Dice, DisjointMasks) {
  const auto a = make_mask(4, 4, {{0, 0}, {1, 0}});
  const auto b = make_mask(4, 4, {{2, 2}, {3, 3}});
  EXPECT_DOUBLE_EQ(dice(a, b), 0.0);
}

TEST(Dice, HalfOverlap) {
  // |A| = 4, |B| = 4, |A inter B| = 2 -> 2*2/(4+4) = 0.5
  const auto a = make_mask(8, 1, {{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  const auto b = make_mask(8, 1, {{2, 0}, {3, 0}, {4, 0}, {5, 0}});
  EXPECT_DOUBLE_EQ(dice(a, b), 0.5);
}

TEST(Dice, BothEmptyIsPerfect) {
  const BinaryMask a(5, 5), b(5, 5);
  EXPECT_DOUBLE_EQ(dice(a, b), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, b), 1.0);
}

TEST(Dice, DimensionMismatchThrows) {
  const BinaryMask a(4, 4), b(4, 5);
  EXPECT_THROW(dice(a, b), DimensionError);
  EXPECT_THROW(iou(a, b), DimensionError);
}

TEST(Iou, IdenticalAndDisjoint) {
  const auto a = make_mask(4, 4, {{0, 0}, {1, 1}});
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  const auto b = make_mask(4, 4, {{3, 3}});
  EXPECT_DOUBLE_EQ(iou(a, b), 0.0);
}

TEST(Iou, DirectFormula) {
  // |A inter B| = 2, |A union B| = 6 -> 1/3
  const auto a = make_mask(8, 1, {{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  const auto b = make_mask(8, 1, {{2, 0}, {3, 0}, {4, 0}, {5, 0}});
  EXPECT_DOUBLE_EQ(iou(a, b), 1.0 / 3.0);
}

// dice = 2 iou / (1 + iou) is an algebraic identity; check it on random
// pairs along with symmetry and the iou <= dice ordering.
TEST(MetricsProperties, DiceIouIdentityOnRandomPairs) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_mask(16, 16, rng, 0.3);
    const auto b = random_mask(16, 16, rng, 0.3);
    const double d = dice(a, b);
    const double i = iou(a, b);
    EXPECT_NEAR(d, 2.0 * i / (1.0 + i), 1e-12);
    EXPECT_LE(i, d + 1e-15);
    EXPECT_DOUBLE_EQ(d, dice(b, a));
    EXPECT_DOUBLE_EQ(i, iou(b, a));
    const MetricsRecord m = metrics(a, b);
    EXPECT_DOUBLE_EQ(m.dice, d);
    EXPECT_DOUBLE_EQ(m.iou, i);
  }
}

// --- losses ---

TEST(DiceLoss, PerfectMatchLimit) {
  const int w = 64, h = 64;
  BinaryMask gt(w, h);
  SoftMask pred(w, h);
  int fg = 0;
  for (int y = 20; y < 40; ++y)
    for (int x = 20; x < 40; ++x) {
      gt.at(x, y) = 1;
      pred.at(x, y) = 1.0;
      ++fg;
    }
  ASSERT_GE(fg, 100);
  EXPECT_LT(dice_loss(pred, gt, 1.0), 1e-3);
}

TEST(DiceLoss, AllZerosWithSmoothingIsZero) {
  const BinaryMask gt(8, 8);
  const SoftMask pred(8, 8, 0.0);
  EXPECT_DOUBLE_EQ(dice_loss(pred, gt, 1.0), 0.0);
}

TEST(DiceLoss, DirectFormulaNoSmoothing) {
  // pred = 0.5 everywhere on 2x2, gt has 2 fg pixels:
  // 1 - (2 * 1) / (2 + 2) = 0.5
  BinaryMask gt(2, 2);
  gt.at(0, 0) = 1;
  gt.at(1, 0) = 1;
  const SoftMask pred(2, 2, 0.5);
  EXPECT_DOUBLE_EQ(dice_loss(pred, gt, 0.0), 0.5);
}

TEST(DiceLoss, ComplementsDiceForBinaryPredictions) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = random_mask(12, 12, rng, 0.4);
    const auto p = random_mask(12, 12, rng, 0.4);
    if (p.count() + g.count() == 0) continue;
    SoftMask soft(12, 12);
    for (std::size_t i = 0; i < soft.values.size(); ++i)
      soft.values[i] = p.bits[i] ? 1.0 : 0.0;
    EXPECT_NEAR(dice_loss(soft, g, 0.0) + dice(p, g), 1.0, 1e-9);
  }
}

TEST(BceLoss, PerfectMatchLimit) {
  BinaryMask gt(8, 8);
  SoftMask pred(8, 8, 0.0);
  for (int x = 0; x < 8; ++x) {
    gt.at(x, 3) = 1;
    pred.at(x, 3) = 1.0;
  }
  EXPECT_LE(bce_loss(pred, gt, 1e-7), -std::log(1.0 - 1e-7) + 1e-9);
}

TEST(BceLoss, UniformHalfIsLogTwo) {
  std::mt19937 rng(3);
  const auto gt = random_mask(16, 16, rng, 0.5);
  const SoftMask pred(16, 16, 0.5);
  EXPECT_NEAR(bce_loss(pred, gt), std::log(2.0), 1e-12);
}

TEST(BceLoss, SinglePixelFormula) {
  BinaryMask gt(1, 1);
  gt.at(0, 0) = 1;
  SoftMask pred(1, 1, 0.9);
  EXPECT_NEAR(bce_loss(pred, gt), -std::log(0.9), 1e-12);
}

TEST(BceLoss, BadClampThrows) {
  const BinaryMask gt(2, 2);
  const SoftMask pred(2, 2, 0.5);
  EXPECT_THROW(bce_loss(pred, gt, 0.0), Error);
  EXPECT_THROW(bce_loss(pred, gt, 0.5), Error);
}

// Analytic gradient (p-g)/(p(1-p))/N against central finite differences.
TEST(BceLoss, GradientMatchesFiniteDifferences) {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> mid(0.1, 0.9);
  BinaryMask gt(4, 4);
  SoftMask pred(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      gt.at(x, y) = (x + y) % 2;
      pred.at(x, y) = mid(rng);
    }
  const auto grad = bce_gradient(pred, gt);
  const double h = 1e-5;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    SoftMask plus = pred, minus = pred;
    plus.values[i] += h;
    minus.values[i] -= h;
    const double numeric = (bce_loss(plus, gt) - bce_loss(minus, gt)) / (2 * h);
    EXPECT_NEAR(grad[i], numeric, 1e-4 * std::max(1.0, std::abs(numeric)));
  }
}
