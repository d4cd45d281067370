#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace uavpheno {

/// Row/column pixel address. Row i grows downward, column j grows right.
struct PixelCoord {
  int i = 0;
  int j = 0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Hue in [0,180), saturation and value in [0,255] (8-bit HSV convention).
struct HsvTriplet {
  std::uint8_t h = 0;
  std::uint8_t s = 0;
  std::uint8_t v = 0;

  friend bool operator==(const HsvTriplet&, const HsvTriplet&) = default;
};

/// 8-bit image with 1 (gray) or 3 (RGB) interleaved channels, row-major.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels);
  RasterImage(int width, int height, int channels, std::vector<std::uint8_t> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return samples_.empty(); }

  std::uint8_t& at(int i, int j, int c = 0) noexcept {
    return samples_[index(i, j, c)];
  }
  std::uint8_t at(int i, int j, int c = 0) const noexcept {
    return samples_[index(i, j, c)];
  }

  bool contains(int i, int j) const noexcept {
    return i >= 0 && j >= 0 && i < height_ && j < width_;
  }

  std::span<std::uint8_t> samples() noexcept { return samples_; }
  std::span<const std::uint8_t> samples() const noexcept { return samples_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t index(int i, int j, int c) const noexcept {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> samples_;
};

/// 16-bit single-channel image, used for density maps.
struct GrayImage16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> samples;
};

/// Hexcone RGB->HSV with hue halved into [0,180); hue, saturation rounded
/// half-up. Achromatic inputs get h = s = 0.
HsvTriplet rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

/// Per-pixel conversion of an RGB image; the result stores h,s,v in
/// channels 0,1,2.
RasterImage rgb_to_hsv(const RasterImage& rgb);

/// Inverse hexcone conversion, rounded to nearest. Used to render colors
/// given in the HSV convention above.
void hsv_to_rgb(double h, double s, double v, std::uint8_t& r, std::uint8_t& g,
                std::uint8_t& b) noexcept;

/// Bilinear sample of channel c at fractional (row, col). Samples more than
/// 1e-6 pixel outside the image return `fill`.
double sample_bilinear(const RasterImage& img, double row, double col, int c,
                       double fill = 0.0) noexcept;

}  // namespace uavpheno
