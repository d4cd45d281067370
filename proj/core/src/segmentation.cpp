#include "uavpheno/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "uavpheno/error.hpp"

namespace uavpheno {

void SegmentationThresholds::validate() const {
  if (tau1 < 0 || tau2 > 179 || tau1 > tau2) {
    throw ConfigError("hue thresholds need 0 <= tau1 <= tau2 <= 179");
  }
  if (tau3 < 0 || tau3 > 255 || tau4 < 0 || tau4 > 255) {
    throw ConfigError("saturation/value thresholds must lie in [0,255]");
  }
}

LeafMask::LeafMask(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw InputError("mask dimensions must be non-negative");
  }
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

LeafMask LeafMask::crop(int i0, int j0, int h, int w) const {
  const int i_begin = std::clamp(i0, 0, height_);
  const int j_begin = std::clamp(j0, 0, width_);
  const int i_end = std::clamp(i0 + h, i_begin, height_);
  const int j_end = std::clamp(j0 + w, j_begin, width_);
  LeafMask out(j_end - j_begin, i_end - i_begin);
  for (int i = i_begin; i < i_end; ++i) {
    for (int j = j_begin; j < j_end; ++j) {
      out.set(i - i_begin, j - j_begin, at(i, j));
    }
  }
  return out;
}

RasterImage LeafMask::to_image() const {
  RasterImage img(width_, height_, 1);
  for (int i = 0; i < height_; ++i) {
    for (int j = 0; j < width_; ++j) {
      img.at(i, j) = at(i, j) ? 255 : 0;
    }
  }
  return img;
}

LeafMask LeafMask::from_image(const RasterImage& gray) {
  if (gray.channels() != 1) {
    throw InputError("mask image must be single-channel");
  }
  LeafMask mask(gray.width(), gray.height());
  for (int i = 0; i < gray.height(); ++i) {
    for (int j = 0; j < gray.width(); ++j) {
      mask.set(i, j, gray.at(i, j) != 0);
    }
  }
  return mask;
}

bool classify_leaf_pixel(HsvTriplet hsv, const SegmentationThresholds& th) noexcept {
  return th.tau1 <= hsv.h && hsv.h <= th.tau2 && (th.tau3 <= hsv.s || th.tau4 <= hsv.v);
}

LeafMask segment_leaves(const RasterImage& rgb, const SegmentationThresholds& th) {
  if (rgb.channels() != 3) {
    throw InputError("leaf segmentation needs an RGB image");
  }
  th.validate();
  LeafMask mask(rgb.width(), rgb.height());
  for (int i = 0; i < rgb.height(); ++i) {
    for (int j = 0; j < rgb.width(); ++j) {
      const HsvTriplet hsv = rgb_to_hsv(rgb.at(i, j, 0), rgb.at(i, j, 1), rgb.at(i, j, 2));
      mask.set(i, j, classify_leaf_pixel(hsv, th));
    }
  }
  return mask;
}

std::int64_t count_pixels(const LeafMask& mask) noexcept {
  std::int64_t alpha = 0;
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      alpha += mask.at(i, j) ? 1 : 0;
    }
  }
  return alpha;
}

LeafCountCalibration calibrate_rho(std::int64_t alpha0, std::int64_t lambda0) {
  if (alpha0 < 1 || lambda0 < 1) {
    throw ConfigError("rho calibration needs alpha0 >= 1 and lambda0 >= 1");
  }
  return {static_cast<double>(alpha0) / static_cast<double>(lambda0)};
}

LeafCountEstimate estimate_leaf_count(std::int64_t alpha, const LeafCountCalibration& cal) {
  if (!(cal.rho > 0.0)) {
    throw ConfigError("rho must be > 0");
  }
  LeafCountEstimate est;
  est.value = static_cast<double>(alpha) / cal.rho;
  est.rounded = static_cast<std::int64_t>(std::llround(est.value));
  return est;
}

DensityMap density_heatmap(const LeafMask& mask, int window) {
  if (window < 1 || window % 2 == 0) {
    throw ConfigError("density window must be an odd positive size");
  }
  const int w = mask.width();
  const int h = mask.height();
  const int half = window / 2;
  // sat[(i)*(w+1)+j] = ones in rows < i, cols < j.
  std::vector<std::uint32_t> sat(static_cast<std::size_t>(w + 1) * static_cast<std::size_t>(h + 1), 0);
  auto S = [&](int i, int j) -> std::uint32_t& {
    return sat[static_cast<std::size_t>(i) * static_cast<std::size_t>(w + 1) +
               static_cast<std::size_t>(j)];
  };
  for (int i = 0; i < h; ++i) {
    std::uint32_t row = 0;
    for (int j = 0; j < w; ++j) {
      row += mask.at(i, j) ? 1u : 0u;
      S(i + 1, j + 1) = S(i, j + 1) + row;
    }
  }
  DensityMap map{w, h, window, {}};
  map.counts.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (int i = 0; i < h; ++i) {
    const int i0 = std::max(0, i - half);
    const int i1 = std::min(h, i + half + 1);
    for (int j = 0; j < w; ++j) {
      const int j0 = std::max(0, j - half);
      const int j1 = std::min(w, j + half + 1);
      map.counts[static_cast<std::size_t>(i) * static_cast<std::size_t>(w) +
                 static_cast<std::size_t>(j)] = S(i1, j1) - S(i0, j1) - S(i1, j0) + S(i0, j0);
    }
  }
  return map;
}

GrayImage16 density_to_gray16(const DensityMap& map) {
  GrayImage16 img{map.width, map.height, {}};
  img.samples.reserve(map.counts.size());
  for (std::uint32_t c : map.counts) {
    img.samples.push_back(static_cast<std::uint16_t>(std::min<std::uint32_t>(c, 65535u)));
  }
  return img;
}

std::string density_to_csv(const DensityMap& map) {
  std::string out;
  for (int i = 0; i < map.height; ++i) {
    for (int j = 0; j < map.width; ++j) {
      if (j > 0) {
        out += ',';
      }
      out += std::to_string(map.at(i, j));
    }
    out += '\n';
  }
  return out;
}

RasterImage density_preview(const DensityMap& map) {
  RasterImage img(map.width, map.height, 3);
  const double full = static_cast<double>(map.window) * map.window;
  static constexpr std::array<std::array<double, 3>, 5> kRamp{{
      {0, 0, 96}, {0, 128, 255}, {0, 200, 80}, {255, 220, 0}, {220, 20, 20}}};
  for (int i = 0; i < map.height; ++i) {
    for (int j = 0; j < map.width; ++j) {
      const double t = std::clamp(map.at(i, j) / full, 0.0, 1.0) * (kRamp.size() - 1);
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(t), kRamp.size() - 2);
      const double f = t - static_cast<double>(k);
      for (int c = 0; c < 3; ++c) {
        const double v = (1.0 - f) * kRamp[k][static_cast<std::size_t>(c)] +
                         f * kRamp[k + 1][static_cast<std::size_t>(c)];
        img.at(i, j, c) = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }
  return img;
}

}  // namespace uavpheno
