#include <gtest/gtest.h>

#include <cmath>

#include "oaa/errors.hpp"
#include "oaa/tensor.hpp"
#include "test_support.hpp"

namespace oaa {
namespace {

const Shape k32{32, 32, 3};

TEST(FlattenIndex, ChannelsLastRowMajor) {
  EXPECT_EQ(flatten_index({0, 0, 0}, k32), 0u);
  EXPECT_EQ(flatten_index({0, 1, 0}, k32), 3u);
  EXPECT_EQ(flatten_index({1, 0, 2}, k32), 98u);  // (1*32+0)*3+2
}

TEST(FlattenIndex, OutOfRangeThrows) {
  EXPECT_THROW(flatten_index({32, 0, 0}, k32), BoundsError);
  EXPECT_THROW(flatten_index({0, 32, 0}, k32), BoundsError);
  EXPECT_THROW(flatten_index({0, 0, 3}, k32), BoundsError);
  EXPECT_THROW(unflatten_index(k32.size(), k32), BoundsError);
}

TEST(FlattenIndex, BijectionOnSmallShape) {
  const Shape s{4, 5, 3};
  std::vector<int> hit(s.size(), 0);
  for (std::size_t y = 0; y < s.height; ++y)
    for (std::size_t x = 0; x < s.width; ++x)
      for (std::size_t c = 0; c < s.channels; ++c) {
        const Coordinate coord{y, x, c};
        const auto i = flatten_index(coord, s);
        ASSERT_LT(i, s.size());
        ++hit[i];
        EXPECT_EQ(unflatten_index(i, s), coord);
      }
  for (int h : hit) EXPECT_EQ(h, 1);
}

TEST(ImageTensor, RejectsOutOfDomainValues) {
  const Shape s{1, 1, 3};
  EXPECT_THROW(ImageTensor(s, {0.0, 1.5, 0.0}), ConfigError);
  EXPECT_THROW(ImageTensor(s, {0.0, -0.1, 0.0}), ConfigError);
  EXPECT_THROW(ImageTensor(s, {0.0, std::nan(""), 0.0}), ConfigError);
  EXPECT_THROW(ImageTensor(s, {0.0, 0.0}), ShapeError);
}

TEST(ApplyStep, AddsAndClamps) {
  const Shape s{1, 1, 3};
  const ImageTensor img(s, {0.5, 0.9, 0.1});
  EXPECT_DOUBLE_EQ(apply_step(img, {0, 0, 0}, 0.2).at({0, 0, 0}), 0.7);
  EXPECT_EQ(apply_step(img, {0, 0, 1}, 0.2).at({0, 0, 1}), 1.0);
  EXPECT_EQ(apply_step(img, {0, 0, 2}, -0.2).at({0, 0, 2}), 0.0);
  EXPECT_THROW(apply_step(img, {0, 1, 0}, 0.2), BoundsError);
  EXPECT_THROW(apply_step(img, {0, 0, 0}, INFINITY), ConfigError);
}

TEST(ApplyStep, ChangesExactlyOneElementExhaustively) {
  const Shape s{3, 3, 3};
  const ImageTensor img = testing::random_image(s, 11);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (double alpha : {0.2, -0.2, 0.7, -0.7}) {
      const ImageTensor out = apply_step(img, unflatten_index(i, s), alpha);
      std::size_t changed = 0;
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (j != i) {
          EXPECT_EQ(out[j], img[j]);
        }
        changed += out[j] != img[j];
      }
      EXPECT_LE(changed, 1u);
    }
  }
}

TEST(ApplyStep, RealizedDeltaNeverExceedsAlpha) {
  // 0.1 + 0.2 rounds to 0.30000000000000004, whose difference from 0.1 is
  // one ulp above 0.2.
  ImageTensor img({1, 1, 3}, {0.1, 0.3, 0.7});
  EXPECT_LE(std::abs(img.add_clamped(0, 0.2)), 0.2);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20000; ++trial) {
    ImageTensor t({1, 1, 3}, {testing::uniform01(rng), 0.0, 0.0});
    const double before = t[0];
    const double alpha = trial % 2 ? 0.2 : -0.2;
    const double delta = t.add_clamped(0, alpha);
    ASSERT_LE(std::abs(delta), 0.2);
    ASSERT_EQ(t[0] - before, delta);
    ASSERT_GE(t[0], 0.0);
    ASSERT_LE(t[0], 1.0);
  }
}

TEST(L2Distance, Examples) {
  const Shape s{4, 4, 3};
  const ImageTensor a = testing::random_image(s, 1);
  EXPECT_EQ(l2_distance(a, a), 0.0);

  std::vector<double> base(s.size(), 0.5), moved(s.size(), 0.5);
  for (std::size_t i : {0, 7, 20, 47}) moved[i] = 0.7;
  EXPECT_NEAR(l2_distance(ImageTensor(s, base), ImageTensor(s, moved)), 0.4, 1e-12);

  EXPECT_THROW(l2_distance(a, ImageTensor({4, 5, 3})), ShapeError);
}

TEST(L2Distance, MatchesBruteForceSummation) {
  const Shape s{8, 8, 3};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = testing::random_image(s, 2 * seed);
    const auto b = testing::random_image(s, 2 * seed + 1);
    EXPECT_NEAR(l2_distance(a, b), testing::brute_l2(a, b), 1e-12);
  }
}

TEST(L2Distance, SymmetricAndTriangle) {
  const Shape s{5, 5, 3};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = testing::random_image(s, 3 * seed);
    const auto b = testing::random_image(s, 3 * seed + 1);
    const auto c = testing::random_image(s, 3 * seed + 2);
    EXPECT_EQ(l2_distance(a, b), l2_distance(b, a));
    EXPECT_LE(l2_distance(a, c), l2_distance(a, b) + l2_distance(b, c) + 1e-9);
  }
}

TEST(Perturbation, DifferenceAndCounts) {
  const Shape s{1, 2, 3};
  const ImageTensor a(s, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  const ImageTensor b = apply_step(a, {0, 1, 2}, -0.25);
  const Perturbation p = difference(a, b);
  EXPECT_EQ(p.nonzero_count(), 1u);
  EXPECT_EQ(p[5], -0.25);
  EXPECT_EQ(p.max_abs(), 0.25);
}

}  // namespace
}  // namespace oaa
