#include <irisloc/morphology.hpp>
#include <irisloc/synth.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <cmath>
#include <random>

namespace irisloc {
namespace {

TEST(Erode, Examples) {
  EXPECT_TRUE(erode(BinaryMask(5, 5)).empty());

  BinaryMask center(3, 3);
  center.set(1, 1);
  EXPECT_EQ(erode(BinaryMask(3, 3, true)), center);

  const auto d5 = oracle::disk(21, 21, 10, 10, 5);
  const auto e = erode(d5);
  EXPECT_EQ(e, oracle::erode(d5));
  EXPECT_EQ(e.popcount(), oracle::erode(d5).popcount());
  EXPECT_TRUE(e.subset_of(oracle::disk(21, 21, 10, 10, 4.0 + 1e-9)));
}

TEST(Dilate, Examples) {
  EXPECT_TRUE(dilate(BinaryMask(4, 4)).empty());
  BinaryMask center(3, 3);
  center.set(1, 1);
  EXPECT_EQ(dilate(center), BinaryMask(3, 3, true));
}

TEST(ErodeDilate, DualityUnderComplementOnRandomMasks) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto m = oracle::random_mask(rng, 32, 32, 0.6);
    // Padding m with false makes the complement's border true.
    const auto dual = ~oracle::crop(dilate(~oracle::pad(m)));
    ASSERT_EQ(erode(m), dual) << "trial " << trial;
    ASSERT_EQ(erode(m), oracle::erode(m));
    ASSERT_TRUE(dilate(erode(m)).subset_of(m));
    ASSERT_TRUE(m.subset_of(oracle::crop(erode(dilate(oracle::pad(m))))));
  }
}

TEST(FillHoles, AnnulusBecomesDisk) {
  const auto outer = oracle::disk(31, 31, 15, 15, 10);
  const auto inner = oracle::disk(31, 31, 15, 15, 5);
  const auto annulus = outer ^ inner;
  EXPECT_EQ(fill_holes(annulus), outer);
  EXPECT_EQ(fill_holes(outer), outer);
}

TEST(FillHoles, RecoversGeneratorIrisDisk) {
  EyeSpec spec;
  spec.boundary_jitter = 0.8;
  spec.seed = 5;
  const auto eye = gen_eye(spec);
  const auto iris = class_plane(eye.mask, Label::Iris);
  const auto iris_disk = iris | class_plane(eye.mask, Label::Pupil);
  const auto filled = fill_holes(iris);
  EXPECT_EQ(filled.popcount(), iris_disk.popcount());
  EXPECT_EQ(filled, iris_disk);
}

TEST(FillHoles, BorderTouchingBackgroundIsKept) {
  // A "U" open at the top is not a hole.
  BinaryMask u(7, 7);
  for (int y = 1; y < 6; ++y) {
    u.set(1, y);
    u.set(5, y);
  }
  for (int x = 1; x <= 5; ++x) u.set(x, 5);
  EXPECT_EQ(fill_holes(u), u);
  // Diagonal gaps do not connect background (4-connectivity).
  BinaryMask diamond(7, 7);
  diamond.set(3, 1);
  diamond.set(2, 2);
  diamond.set(4, 2);
  diamond.set(1, 3);
  diamond.set(5, 3);
  diamond.set(2, 4);
  diamond.set(4, 4);
  diamond.set(3, 5);
  const auto filled = fill_holes(diamond);
  EXPECT_TRUE(filled.at(3, 3));
  EXPECT_EQ(filled.popcount(), diamond.popcount() + 5);
}

TEST(FillHoles, IdempotentAndMonotoneOnRandomMasks) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto m = oracle::random_mask(rng, 32, 32, 0.55);
    const auto f = fill_holes(m);
    ASSERT_EQ(fill_holes(f), f);
    ASSERT_TRUE(m.subset_of(f));
  }
}

TEST(Contour, Examples) {
  EXPECT_TRUE(contour(BinaryMask(6, 6)).empty());
  BinaryMask ring(3, 3, true);
  ring.set(1, 1, false);
  EXPECT_EQ(contour(BinaryMask(3, 3, true)), ring);
}

TEST(Contour, DiskBoundaryDistances) {
  const double r = 9.0;
  const auto d = oracle::disk(41, 41, 20, 20, r);
  const auto c = contour(d);
  ASSERT_FALSE(c.empty());
  const auto px = c.pixels();
  for (Eigen::Index i = 0; i < px.rows(); ++i) {
    const double dist = std::hypot(px(i, 0) - 20, px(i, 1) - 20);
    // Each contour pixel is in the disk and has a neighbor outside it.
    EXPECT_LE(dist, r + 1e-12);
    EXPECT_GT(dist, r - std::sqrt(2.0));
  }
}

TEST(Contour, SubsetAndEmptinessOnRandomMasks) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto m = oracle::random_mask(rng, 32, 32, trial % 2 ? 0.9 : 0.1);
    const auto c = contour(m);
    ASSERT_TRUE(c.subset_of(m));
    ASSERT_EQ(c.empty(), m.empty());
  }
  EXPECT_TRUE(contour(BinaryMask(4, 4)).empty());
}

TEST(LargestComponent, Examples) {
  EXPECT_TRUE(largest_component(BinaryMask(5, 5)).empty());

  const auto blob = oracle::disk(20, 20, 9, 9, 3);
  EXPECT_EQ(largest_component(blob), blob);

  BinaryMask big(30, 20);
  for (int y = 2; y < 7; ++y)
    for (int x = 2; x < 10; ++x) big.set(x, y);  // 40 px
  BinaryMask small(30, 20);
  for (int x = 20; x < 27; ++x) small.set(x, 15);  // 7 px
  ASSERT_EQ(big.popcount(), 40);
  ASSERT_EQ(small.popcount(), 7);
  const auto kept = largest_component(big | small);
  EXPECT_EQ(kept, big);
  EXPECT_EQ(kept.popcount(), 40);
}

TEST(LargestComponent, TieGoesToFirstInRowMajorOrder) {
  BinaryMask m(10, 10);
  m.set(7, 1);
  m.set(8, 1);
  m.set(1, 5);
  m.set(2, 5);
  BinaryMask expected(10, 10);
  expected.set(7, 1);
  expected.set(8, 1);
  EXPECT_EQ(largest_component(m), expected);
}

TEST(LargestComponent, MatchesReferenceFloodFill) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto m = oracle::random_mask(rng, 32, 32, 0.3 + 0.1 * (trial % 3));
    const auto ref = oracle::bfs_components(m);
    const auto kept = largest_component(m);
    std::int64_t max_size = 0;
    for (auto s : ref.sizes) max_size = std::max(max_size, s);
    ASSERT_EQ(kept.popcount(), max_size);
    ASSERT_TRUE(kept.subset_of(m));
    // kept is exactly one reference component
    int id = -1;
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        if (!kept.at(x, y)) continue;
        const int l = ref.label[y * 32 + x];
        if (id < 0) id = l;
        ASSERT_EQ(l, id);
      }
  }
}

TEST(SuppressHorizontalEdges, FullWidthBarKeepsEndCaps) {
  BinaryMask bar(20, 25);
  for (int y = 10; y <= 14; ++y)
    for (int x = 0; x < 20; ++x) bar.set(x, y);
  const auto kept = suppress_horizontal_edges(contour(bar), bar);
  BinaryMask caps(20, 25);
  for (int y = 10; y <= 14; ++y) {
    caps.set(0, y);
    caps.set(19, y);
  }
  EXPECT_EQ(kept, caps);
}

TEST(SuppressHorizontalEdges, VerticalBarKeepsSides) {
  BinaryMask bar(30, 20);
  for (int y = 0; y < 20; ++y)
    for (int x = 10; x <= 14; ++x) bar.set(x, y);
  const auto kept = suppress_horizontal_edges(contour(bar), bar);
  BinaryMask sides(30, 20);
  for (int y = 0; y < 20; ++y) {
    sides.set(10, y);
    sides.set(14, y);
  }
  EXPECT_EQ(kept, sides);
}

TEST(SuppressHorizontalEdges, EmptyAndMismatch) {
  const BinaryMask src = oracle::disk(20, 20, 10, 10, 5);
  EXPECT_TRUE(suppress_horizontal_edges(BinaryMask(20, 20), src).empty());
  EXPECT_THROW(suppress_horizontal_edges(BinaryMask(20, 21), src), DimensionMismatch);
}

TEST(SuppressHorizontalEdges, RemovesDiskPolesKeepsFlanks) {
  const auto d = oracle::disk(61, 61, 30, 30, 20);
  const auto kept = suppress_horizontal_edges(contour(d), d);
  EXPECT_FALSE(kept.at(30, 10));  // top pole
  EXPECT_FALSE(kept.at(30, 50));  // bottom pole
  EXPECT_TRUE(kept.at(10, 30));   // left flank
  EXPECT_TRUE(kept.at(50, 30));   // right flank
  EXPECT_TRUE(kept.subset_of(contour(d)));
}

}  // namespace
}  // namespace irisloc
