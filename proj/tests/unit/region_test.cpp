#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oaa/errors.hpp"
#include "oaa/region.hpp"
#include "test_support.hpp"

namespace oaa {
namespace {

DetectionBox box(double conf, std::size_t l, std::size_t t, std::size_t r, std::size_t b) {
  return {"obj", conf, l, t, r, b};
}

RegionMask left_half(std::size_t n) {
  RegionMask m(n, n);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n / 2; ++x) m.set(y, x);
  return m;
}

TEST(RasterizeBoxes, SingleBoxIsItsRectangle) {
  const std::vector<DetectionBox> boxes = {box(0.9, 2, 1, 5, 4)};
  const auto mask = rasterize_boxes(boxes, 0.3, 8, 8);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x)
      EXPECT_EQ(mask.at(y, x), y >= 1 && y < 4 && x >= 2 && x < 5) << y << "," << x;
  EXPECT_EQ(mask.count(), 9u);
}

TEST(RasterizeBoxes, ThresholdIsStrict) {
  const std::vector<DetectionBox> boxes = {box(0.2, 0, 0, 2, 2), box(0.5, 4, 4, 6, 6)};
  const auto mask = rasterize_boxes(boxes, 0.3, 8, 8);
  EXPECT_EQ(mask, rasterize_boxes(std::vector{boxes[1]}, 0.3, 8, 8));
  EXPECT_FALSE(mask.at(0, 0));
  // Confidence equal to p_t is discarded.
  EXPECT_TRUE(rasterize_boxes(std::vector{box(0.3, 0, 0, 2, 2)}, 0.3, 8, 8).empty());
}

TEST(RasterizeBoxes, OverlappingUnionMatchesPerPixelMembership) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<DetectionBox> boxes = {testing::random_box(rng, 12, 10),
                                       testing::random_box(rng, 12, 10)};
    const double p_t = testing::uniform01(rng);
    const auto mask = rasterize_boxes(boxes, p_t, 12, 10);
    const auto expected = testing::brute_s1(boxes, p_t, 12, 10);
    std::size_t area = 0;
    for (std::size_t y = 0; y < 12; ++y)
      for (std::size_t x = 0; x < 10; ++x) {
        ASSERT_EQ(mask.at(y, x), expected[y][x] == 1);
        area += expected[y][x];
      }
    EXPECT_EQ(mask.count(), area);
  }
}

TEST(RasterizeBoxes, InvalidBoxes) {
  EXPECT_THROW(rasterize_boxes(std::vector{box(0.9, 0, 0, 9, 2)}, 0.3, 8, 8), BoundsError);
  EXPECT_THROW(rasterize_boxes(std::vector{box(0.9, 3, 0, 3, 2)}, 0.3, 8, 8), BoundsError);
  EXPECT_THROW(rasterize_boxes(std::vector{box(1.2, 0, 0, 2, 2)}, 0.3, 8, 8), ConfigError);
  // Boxes below the threshold are still validated.
  EXPECT_THROW(rasterize_boxes(std::vector{box(0.1, 0, 0, 2, 9)}, 0.3, 8, 8), BoundsError);
}

TEST(ActivationFactor, AreaRatio) {
  // |S1| = 200 (10x20), |S1 & S2| = 40 (first two rows).
  RegionMask s1(20, 20), s2(20, 20);
  for (std::size_t y = 0; y < 10; ++y)
    for (std::size_t x = 0; x < 20; ++x) s1.set(y, x);
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t x = 0; x < 20; ++x) s2.set(y, x);
  EXPECT_EQ(activation_factor(s1, s2), 5.0);

  EXPECT_EQ(activation_factor(s1, RegionMask::full(20, 20)), 1.0);
  EXPECT_EQ(activation_factor(s1, RegionMask(20, 20)), kInfiniteActivation);
  EXPECT_EQ(activation_factor(RegionMask(20, 20), s2), 0.0);
  EXPECT_THROW(activation_factor(s1, RegionMask(20, 21)), ShapeError);
}

TEST(Combine, FullBoxHalfSaliencyUsesIntersection) {
  // k = 256 / 128 = 2 <= 3.
  const std::vector<DetectionBox> boxes = {box(0.9, 0, 0, 16, 16)};
  const RegionConfig cfg{0.3, 3.0, RegionMode::kObjectAttentional};
  const auto out = combine(boxes, left_half(16), cfg, 16, 16);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x) {
      const bool expected = (y < 16 && x < 16) && (x < 8);  // S1 & S2
      EXPECT_EQ(out.at(y, x), expected);
    }
}

TEST(Combine, IncompleteSaliencyFallsBackToBox) {
  // S1 is 10x10 = 100 pixels, saliency overlaps 10 of them: k = 10 > 3.
  const std::vector<DetectionBox> boxes = {box(0.9, 0, 0, 10, 10)};
  RegionMask saliency(16, 16);
  for (std::size_t x = 0; x < 10; ++x) saliency.set(0, x);
  saliency.set(15, 15);
  const RegionConfig cfg{0.3, 3.0, RegionMode::kObjectAttentional};
  const auto out = combine(boxes, saliency, cfg, 16, 16);
  EXPECT_EQ(out, rasterize_boxes(boxes, 0.3, 16, 16));
}

TEST(Combine, NoConfidentBoxFallsBackToFullImage) {
  const std::vector<DetectionBox> boxes = {box(0.1, 0, 0, 4, 4)};
  const RegionConfig cfg{0.3, 3.0, RegionMode::kObjectAttentional};
  EXPECT_EQ(combine(boxes, left_half(8), cfg, 8, 8), RegionMask::full(8, 8));
  EXPECT_EQ(combine({}, left_half(8), cfg, 8, 8), RegionMask::full(8, 8));
}

TEST(Combine, AblationModes) {
  const std::vector<DetectionBox> boxes = {box(0.9, 1, 1, 3, 3)};
  const auto sal = left_half(8);
  RegionConfig cfg;
  cfg.mode = RegionMode::kBoxesOnly;
  EXPECT_EQ(combine(boxes, sal, cfg, 8, 8), rasterize_boxes(boxes, 0.3, 8, 8));
  EXPECT_EQ(combine({}, sal, cfg, 8, 8), RegionMask::full(8, 8));
  cfg.mode = RegionMode::kSaliencyOnly;
  EXPECT_EQ(combine(boxes, sal, cfg, 8, 8), sal);
  EXPECT_EQ(combine(boxes, RegionMask(8, 8), cfg, 8, 8), RegionMask::full(8, 8));
  cfg.mode = RegionMode::kFull;
  EXPECT_EQ(combine(boxes, sal, cfg, 8, 8), RegionMask::full(8, 8));
}

TEST(Combine, Errors) {
  const RegionConfig cfg;
  EXPECT_THROW(combine({}, RegionMask(8, 9), cfg, 8, 8), ShapeError);
  RegionConfig bad = cfg;
  bad.epsilon = 1.0;
  EXPECT_THROW(combine({}, RegionMask(8, 8), bad, 8, 8), ConfigError);
  bad = cfg;
  bad.p_t = 1.5;
  EXPECT_THROW(combine({}, RegionMask(8, 8), bad, 8, 8), ConfigError);
}

TEST(Combine, PropertiesOnRandomInputs) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t h = 2 + rng() % 7, w = 2 + rng() % 7;
    std::vector<DetectionBox> boxes;
    for (std::size_t i = 0, n = rng() % 4; i < n; ++i) boxes.push_back(testing::random_box(rng, h, w));
    const auto sal = testing::random_mask(rng, h, w, testing::uniform01(rng));
    const RegionConfig cfg{testing::uniform01(rng), 1.0 + 10.0 * testing::uniform01(rng) + 1e-9,
                           RegionMode::kObjectAttentional};

    const auto out = combine(boxes, sal, cfg, h, w);
    EXPECT_EQ(out, combine(boxes, sal, cfg, h, w));

    const auto s1 = rasterize_boxes(boxes, cfg.p_t, h, w);
    if (s1.empty()) {
      EXPECT_EQ(out, RegionMask::full(h, w));
      continue;
    }
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        if (out.at(y, x)) ASSERT_TRUE(s1.at(y, x));
    const auto inter = s1 & sal;
    const double k = activation_factor(s1, sal);
    if (k <= cfg.epsilon && !inter.empty()) {
      EXPECT_EQ(out, inter);
    } else {
      EXPECT_EQ(out, s1);
    }
  }
}

TEST(RegionMode, ParseAndPrint) {
  for (auto m : {RegionMode::kObjectAttentional, RegionMode::kBoxesOnly, RegionMode::kSaliencyOnly,
                 RegionMode::kFull}) {
    EXPECT_EQ(parse_region_mode(to_string(m)), m);
  }
  EXPECT_EQ(parse_region_mode("OA"), RegionMode::kObjectAttentional);
  EXPECT_THROW(parse_region_mode("simba"), ConfigError);
}

TEST(MaskToCoordinates, Cardinality) {
  EXPECT_EQ(mask_to_coordinates(RegionMask::full(2, 2), 3, 0).size(), 12u);
  RegionMask one(5, 5);
  one.set(2, 3);
  const auto coords = mask_to_coordinates(one, 3, 9);
  ASSERT_EQ(coords.size(), 3u);
  std::set<std::size_t> channels;
  for (const auto& c : coords) {
    EXPECT_EQ(c.y, 2u);
    EXPECT_EQ(c.x, 3u);
    channels.insert(c.c);
  }
  EXPECT_EQ(channels, (std::set<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(mask_to_coordinates(RegionMask(3, 3), 3, 0).empty());
}

TEST(MaskToCoordinates, MatchesExplicitQConstruction) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DetectionBox> boxes = {testing::random_box(rng, 8, 8), testing::random_box(rng, 8, 8)};
    const auto sal = testing::random_mask(rng, 8, 8, 0.5);
    const RegionConfig cfg{0.3, 3.0, RegionMode::kObjectAttentional};
    const auto coords = mask_to_coordinates(combine(boxes, sal, cfg, 8, 8), 3, trial);
    std::set<std::size_t> got;
    for (const auto& c : coords) got.insert(flatten_index(c, coords.shape()));
    EXPECT_EQ(got.size(), coords.size());
    EXPECT_EQ(got, testing::explicit_q_support(boxes, sal, cfg.p_t, cfg.epsilon, 8, 8));
  }
}

TEST(MaskToCoordinates, SeedChangesOrderNotSet) {
  std::mt19937_64 rng(2);
  const auto mask = testing::random_mask(rng, 10, 10, 0.6);
  const auto a = mask_to_coordinates(mask, 3, 1);
  const auto b = mask_to_coordinates(mask, 3, 2);
  const auto a_again = mask_to_coordinates(mask, 3, 1);
  std::vector<Coordinate> va(a.begin(), a.end()), vb(b.begin(), b.end());
  EXPECT_TRUE(std::equal(a.begin(), a.end(), a_again.begin(), a_again.end()));
  EXPECT_NE(va, vb);
  std::sort(va.begin(), va.end());
  std::sort(vb.begin(), vb.end());
  EXPECT_EQ(va, vb);
}

TEST(CoordinateSet, RejectsDuplicates) {
  EXPECT_THROW(CoordinateSet({2, 2, 3}, {{0, 0, 0}, {0, 0, 0}}), ConfigError);
  EXPECT_THROW(CoordinateSet({2, 2, 3}, {{2, 0, 0}}), BoundsError);
}

}  // namespace
}  // namespace oaa
