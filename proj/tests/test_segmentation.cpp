#include <gtest/gtest.h>

#include "support.hpp"
#include "uavpheno/error.hpp"
#include "uavpheno/png_io.hpp"
#include "uavpheno/rng.hpp"
#include "uavpheno/segmentation.hpp"

namespace uavpheno {
namespace {

const SegmentationThresholds kDefault{30, 79, 30, 163};

TEST(ClassifyLeafPixel, GreenSaturated) { EXPECT_TRUE(classify_leaf_pixel({50, 200, 100}, kDefault)); }

TEST(ClassifyLeafPixel, GreenButDullAndDark) {
  EXPECT_FALSE(classify_leaf_pixel({50, 10, 100}, kDefault));
}

TEST(ClassifyLeafPixel, RedIsOutsideTheBand) {
  EXPECT_FALSE(classify_leaf_pixel({0, 255, 255}, kDefault));
}

TEST(ClassifyLeafPixel, BrightDullGreenPassesOnValue) {
  EXPECT_TRUE(classify_leaf_pixel({50, 10, 163}, kDefault));
  EXPECT_FALSE(classify_leaf_pixel({50, 10, 162}, kDefault));
}

TEST(ClassifyLeafPixel, HueBoundsAreInclusive) {
  EXPECT_TRUE(classify_leaf_pixel({30, 30, 0}, kDefault));
  EXPECT_TRUE(classify_leaf_pixel({79, 30, 0}, kDefault));
  EXPECT_FALSE(classify_leaf_pixel({29, 255, 255}, kDefault));
  EXPECT_FALSE(classify_leaf_pixel({80, 255, 255}, kDefault));
}

TEST(SegmentLeaves, GoldenTestCard) {
  const RasterImage card = load_image(test::data_dir() / "test_card.png");
  const LeafMask golden = LeafMask::from_image(load_image(test::data_dir() / "test_card_mask.png"));
  ASSERT_EQ(card.width(), 64);
  ASSERT_EQ(card.height(), 64);
  EXPECT_EQ(segment_leaves(card, kDefault), golden);
}

TEST(SegmentLeaves, MonotoneInThresholds) {
  const RasterImage card = load_image(test::data_dir() / "test_card.png");
  const LeafMask base = segment_leaves(card, kDefault);
  for (const SegmentationThresholds tighter :
       {SegmentationThresholds{35, 79, 30, 163}, SegmentationThresholds{30, 70, 30, 163},
        SegmentationThresholds{30, 79, 90, 163}, SegmentationThresholds{30, 79, 30, 220}}) {
    const LeafMask m = segment_leaves(card, tighter);
    for (int i = 0; i < m.height(); ++i) {
      for (int j = 0; j < m.width(); ++j) {
        EXPECT_TRUE(!m.at(i, j) || base.at(i, j));
      }
    }
    EXPECT_LE(count_pixels(m), count_pixels(base));
  }
}

TEST(SegmentLeaves, RejectsGrayInput) {
  EXPECT_THROW(segment_leaves(RasterImage(4, 4, 1), kDefault), InputError);
}

TEST(Thresholds, Validation) {
  EXPECT_THROW((SegmentationThresholds{80, 30, 30, 163}.validate()), ConfigError);
  EXPECT_THROW((SegmentationThresholds{30, 180, 30, 163}.validate()), ConfigError);
  EXPECT_THROW((SegmentationThresholds{30, 79, 256, 163}.validate()), ConfigError);
}

TEST(CountPixels, Examples) {
  EXPECT_EQ(count_pixels(LeafMask(7, 5)), 0);
  LeafMask m(3, 3);
  for (auto [i, j] : {std::pair{0, 0}, {0, 2}, {1, 1}, {2, 0}, {2, 2}}) {
    m.set(i, j, true);
  }
  EXPECT_EQ(count_pixels(m), 5);
  LeafMask full(10, 10);
  test::fill_block(full, 0, 0, 10, 10);
  EXPECT_EQ(count_pixels(full), 100);
}

TEST(CalibrateRho, Examples) {
  EXPECT_DOUBLE_EQ(calibrate_rho(600, 30).rho, 20.0);
  EXPECT_DOUBLE_EQ(calibrate_rho(7, 7).rho, 1.0);
  EXPECT_DOUBLE_EQ(calibrate_rho(100, 8).rho, 12.5);
  EXPECT_THROW(calibrate_rho(0, 5), ConfigError);
  EXPECT_THROW(calibrate_rho(5, 0), ConfigError);
}

TEST(EstimateLeafCount, Examples) {
  EXPECT_DOUBLE_EQ(estimate_leaf_count(2000, {20.0}).value, 100.0);
  EXPECT_EQ(estimate_leaf_count(2000, {20.0}).rounded, 100);
  EXPECT_EQ(estimate_leaf_count(0, {20.0}).rounded, 0);
  EXPECT_EQ(estimate_leaf_count(31, {20.0}).rounded, 2);
}

TEST(DensityHeatmap, AllOnesInterior) {
  LeafMask m(100, 100);
  test::fill_block(m, 0, 0, 100, 100);
  const DensityMap d = density_heatmap(m, 41);
  EXPECT_EQ(d.counts[50 * 100 + 50], 1681u);
}

TEST(DensityHeatmap, AllZeros) {
  const DensityMap d = density_heatmap(LeafMask(20, 10), 41);
  for (auto c : d.counts) {
    EXPECT_EQ(c, 0u);
  }
}

TEST(DensityHeatmap, SinglePixelBoxResponse) {
  LeafMask m(7, 7);
  m.set(3, 3, true);
  const DensityMap d = density_heatmap(m, 3);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      const bool inside = std::abs(i - 3) <= 1 && std::abs(j - 3) <= 1;
      EXPECT_EQ(d.counts[i * 7 + j], inside ? 1u : 0u);
    }
  }
}

TEST(DensityHeatmap, MatchesBruteForceOnRandomMasks) {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    LeafMask m(32, 32);
    for (int i = 0; i < 32; ++i) {
      for (int j = 0; j < 32; ++j) {
        m.set(i, j, rng.uniform() < 0.4);
      }
    }
    for (int window : {1, 5, 41}) {
      const DensityMap d = density_heatmap(m, window);
      const int h = window / 2;
      for (int i = 0; i < 32; ++i) {
        for (int j = 0; j < 32; ++j) {
          std::uint32_t n = 0;
          for (int a = i - h; a <= i + h; ++a) {
            for (int b = j - h; b <= j + h; ++b) {
              n += m.get(a, b) ? 1 : 0;
            }
          }
          ASSERT_EQ(d.counts[i * 32 + j], n);
        }
      }
    }
  }
}

TEST(DensityHeatmap, EvenWindowIsRejected) {
  EXPECT_THROW(density_heatmap(LeafMask(4, 4), 4), ConfigError);
}

TEST(DensityHeatmap, Gray16AndCsv) {
  LeafMask m(3, 2);
  m.set(0, 0, true);
  const DensityMap d = density_heatmap(m, 3);
  const GrayImage16 g = density_to_gray16(d);
  EXPECT_EQ(g.samples, (std::vector<std::uint16_t>{1, 1, 0, 1, 1, 0}));
  EXPECT_EQ(density_to_csv(d), "1,1,0\n1,1,0\n");
  EXPECT_EQ(density_preview(d).channels(), 3);
}

TEST(LeafMask, CropClipsAndImageRoundTrips) {
  LeafMask m(5, 4);
  test::fill_block(m, 1, 1, 2, 3);
  const LeafMask c = m.crop(1, 1, 10, 10);
  EXPECT_EQ(c.width(), 4);
  EXPECT_EQ(c.height(), 3);
  EXPECT_EQ(count_pixels(c), 6);
  EXPECT_EQ(LeafMask::from_image(m.to_image()), m);
}

}  // namespace
}  // namespace uavpheno
