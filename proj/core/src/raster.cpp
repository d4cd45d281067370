#include "uavpheno/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uavpheno/error.hpp"

namespace uavpheno {

namespace {

void check_shape(int width, int height, int channels) {
  if (width < 1 || height < 1) {
    throw InputError("raster dimensions must be positive, got " + std::to_string(width) +
                     "x" + std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw InputError("raster must have 1 or 3 channels, got " + std::to_string(channels));
  }
}

}  // namespace

RasterImage::RasterImage(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  samples_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                      static_cast<std::size_t>(channels),
                  0);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
  check_shape(width, height, channels);
  const auto expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                        static_cast<std::size_t>(channels);
  if (samples_.size() != expected) {
    throw InputError("raster sample count " + std::to_string(samples_.size()) +
                     " does not match " + std::to_string(expected));
  }
}

HsvTriplet rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  const int R = r, G = g, B = b;
  const int vmax = std::max({R, G, B});
  const int vmin = std::min({R, G, B});
  const int diff = vmax - vmin;

  HsvTriplet out;
  out.v = static_cast<std::uint8_t>(vmax);
  if (vmax == 0 || diff == 0) {
    return out;
  }
  // s = round_half_up(255 * diff / vmax), exact in integers.
  out.s = static_cast<std::uint8_t>((2 * 255 * diff + vmax) / (2 * vmax));

  // Half-degree hue as the rational num/diff, sector base in half-degrees.
  int num;
  if (vmax == R) {
    num = 30 * (G - B);
  } else if (vmax == G) {
    num = 60 * diff + 30 * (B - R);
  } else {
    num = 120 * diff + 30 * (R - G);
  }
  if (num < 0) {
    num += 180 * diff;
  }
  int h = (2 * num + diff) / (2 * diff);
  if (h >= 180) {
    h -= 180;
  }
  out.h = static_cast<std::uint8_t>(h);
  return out;
}

RasterImage rgb_to_hsv(const RasterImage& rgb) {
  if (rgb.channels() != 3) {
    throw InputError("rgb_to_hsv needs a 3-channel image");
  }
  RasterImage hsv(rgb.width(), rgb.height(), 3);
  for (int i = 0; i < rgb.height(); ++i) {
    for (int j = 0; j < rgb.width(); ++j) {
      const HsvTriplet t = rgb_to_hsv(rgb.at(i, j, 0), rgb.at(i, j, 1), rgb.at(i, j, 2));
      hsv.at(i, j, 0) = t.h;
      hsv.at(i, j, 1) = t.s;
      hsv.at(i, j, 2) = t.v;
    }
  }
  return hsv;
}

void hsv_to_rgb(double h, double s, double v, std::uint8_t& r, std::uint8_t& g,
                std::uint8_t& b) noexcept {
  const double hue = std::fmod(h * 2.0, 360.0) / 60.0;  // sector in [0,6)
  const double sat = s / 255.0;
  const double c = v * sat;
  const double x = c * (1.0 - std::abs(std::fmod(hue, 2.0) - 1.0));
  const double m = v - c;
  double rp = 0, gp = 0, bp = 0;
  switch (static_cast<int>(hue)) {
    case 0: rp = c; gp = x; break;
    case 1: rp = x; gp = c; break;
    case 2: gp = c; bp = x; break;
    case 3: gp = x; bp = c; break;
    case 4: rp = x; bp = c; break;
    default: rp = c; bp = x; break;
  }
  auto to8 = [](double value) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
  };
  r = to8(rp + m);
  g = to8(gp + m);
  b = to8(bp + m);
}

double sample_bilinear(const RasterImage& img, double row, double col, int c,
                       double fill) noexcept {
  constexpr double kSlack = 1e-6;
  const double max_row = img.height() - 1;
  const double max_col = img.width() - 1;
  if (!(row >= -kSlack && col >= -kSlack && row <= max_row + kSlack && col <= max_col + kSlack)) {
    return fill;
  }
  row = std::clamp(row, 0.0, max_row);
  col = std::clamp(col, 0.0, max_col);
  const int i0 = static_cast<int>(row);
  const int j0 = static_cast<int>(col);
  const int i1 = std::min(i0 + 1, img.height() - 1);
  const int j1 = std::min(j0 + 1, img.width() - 1);
  const double fi = row - i0;
  const double fj = col - j0;
  const double top = (1.0 - fj) * img.at(i0, j0, c) + fj * img.at(i0, j1, c);
  const double bottom = (1.0 - fj) * img.at(i1, j0, c) + fj * img.at(i1, j1, c);
  return (1.0 - fi) * top + fi * bottom;
}

}  // namespace uavpheno
