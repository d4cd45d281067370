#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavpheno/raster.hpp"

namespace uavpheno {

/// HSV thresholds in the 8-bit convention (hue [0,180), s and v [0,255]).
struct SegmentationThresholds {
  int tau1 = 30;
  int tau2 = 79;
  int tau3 = 30;
  int tau4 = 163;

  void validate() const;
};

/// One bit per pixel, row-major.
class LeafMask {
 public:
  LeafMask() = default;
  LeafMask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool contains(int i, int j) const noexcept {
    return i >= 0 && j >= 0 && i < height_ && j < width_;
  }
  bool at(int i, int j) const noexcept { return bits_[index(i, j)] != 0; }
  /// False outside the image.
  bool get(int i, int j) const noexcept { return contains(i, j) && at(i, j); }
  void set(int i, int j, bool value) noexcept { bits_[index(i, j)] = value ? 1 : 0; }

  /// Sub-rectangle copy; the rectangle is clipped to the mask.
  LeafMask crop(int i0, int j0, int height, int width) const;

  /// Grayscale image with 0 / 255.
  RasterImage to_image() const;
  /// Any nonzero gray sample becomes a leaf pixel.
  static LeafMask from_image(const RasterImage& gray);

  friend bool operator==(const LeafMask&, const LeafMask&) = default;

 private:
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(j);
  }
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Y_m = 1 iff tau1 <= H <= tau2 and (tau3 <= S or tau4 <= V).
bool classify_leaf_pixel(HsvTriplet hsv, const SegmentationThresholds& th) noexcept;

/// Throws InputError for non-RGB input.
LeafMask segment_leaves(const RasterImage& rgb, const SegmentationThresholds& th);

/// Number of leaf pixels (alpha).
std::int64_t count_pixels(const LeafMask& mask) noexcept;

/// Pixels per leaf (rho).
struct LeafCountCalibration {
  double rho = 1.0;
};

/// rho = alpha0 / lambda0. Throws ConfigError unless both are >= 1.
LeafCountCalibration calibrate_rho(std::int64_t alpha0, std::int64_t lambda0);

struct LeafCountEstimate {
  double value = 0.0;     // alpha / rho, unrounded
  std::int64_t rounded = 0;
};

LeafCountEstimate estimate_leaf_count(std::int64_t alpha, const LeafCountCalibration& cal);

struct DensityMap {
  int width = 0;
  int height = 0;
  int window = 0;
  std::vector<std::uint32_t> counts;

  std::uint32_t at(int i, int j) const {
    return counts[static_cast<std::size_t>(i) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(j)];
  }
};

/// Leaf pixels inside the window x window box centred on each pixel, with
/// the box truncated at the image border. Summed-area table; O(1) per pixel.
/// Throws ConfigError for an even or non-positive window.
DensityMap density_heatmap(const LeafMask& mask, int window = 41);

/// 16-bit copy (counts saturate at 65535).
GrayImage16 density_to_gray16(const DensityMap& map);
/// CSV with one line of comma-separated counts per image row.
std::string density_to_csv(const DensityMap& map);
/// 8-bit RGB preview through a blue-green-yellow-red ramp scaled to window^2.
RasterImage density_preview(const DensityMap& map);

}  // namespace uavpheno
