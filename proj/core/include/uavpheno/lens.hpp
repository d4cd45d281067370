#pragma once

#include <filesystem>
#include <string>
#include <utility>

#include "uavpheno/raster.hpp"

namespace uavpheno {

/// Image-plane point in millimetres.
struct ImagePointMm {
  double x = 0.0;
  double y = 0.0;
};

/// Interior orientation with SMAC radial (k0..k3) and decentering (p1, p2)
/// distortion coefficients.
///
/// The millimetre frame has its origin at the image centre, +x to the right
/// and +y up; pixel centres sit at integer (row, col). The principal point
/// (xp, yp) is given in that frame.
struct SmacCamera {
  double xp = 0.0;
  double yp = 0.0;
  double k0 = 0.0;  // unitless
  double k1 = 0.0;  // mm^-2
  double k2 = 0.0;  // mm^-4
  double k3 = 0.0;  // mm^-6
  double p1 = 0.0;  // mm^-1
  double p2 = 0.0;  // mm^-1
  double r0 = 0.0;  // reference radius, mm
  double focal = 1.0;
  double pixel_pitch = 1.0;  // mm per pixel
  int sensor_width = 1;
  int sensor_height = 1;

  /// Throws ConfigError unless focal > 0, pixel_pitch > 0, r0 >= 0 and the
  /// sensor is at least 1x1.
  void validate() const;
};

ImagePointMm pixel_to_mm(double row, double col, const SmacCamera& cam) noexcept;
/// Returns {row, col}.
std::pair<double, double> mm_to_pixel(ImagePointMm p, const SmacCamera& cam) noexcept;

/// Translates a measured image point to the principal point.
ImagePointMm reduce_to_principal(ImagePointMm p, const SmacCamera& cam) noexcept;

/// Radial correction of a principal-point-reduced point. r is measured from
/// the principal point.
ImagePointMm radial_correction(ImagePointMm reduced, const SmacCamera& cam) noexcept;

/// Decentering correction of a principal-point-reduced point.
ImagePointMm decentering_correction(ImagePointMm reduced, const SmacCamera& cam) noexcept;

/// Measured point -> corrected point, expressed relative to the principal
/// point: reduced + radial + decentering.
ImagePointMm correct_point(ImagePointMm measured, const SmacCamera& cam) noexcept;

struct InversionOptions {
  double tol = 1e-9;  // mm, on the residual correct(x) - corrected
  int max_iter = 50;
};

/// Inverse of correct_point by fixed-point iteration
/// reduced <- corrected - delta(reduced). Throws NumericError when the
/// iteration does not reach `tol` within `max_iter` steps, and ConfigError
/// on tol <= 0 or max_iter < 1.
ImagePointMm invert_correction(ImagePointMm corrected, const SmacCamera& cam,
                               InversionOptions opts = {});

/// Resamples a raw image into its distortion-free geometry. The output keeps
/// the input size and the principal point's pixel position; every output
/// pixel is bilinearly sampled at the inverse-corrected source location and
/// source locations outside the input are black.
RasterImage undistort_image(const RasterImage& img, const SmacCamera& cam, int threads = 1);

SmacCamera load_camera_json(const std::filesystem::path& path);
SmacCamera parse_camera_json(const std::string& text);
std::string camera_to_json(const SmacCamera& cam);

}  // namespace uavpheno
