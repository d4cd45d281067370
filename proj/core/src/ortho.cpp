#include "uavpheno/ortho.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "uavpheno/error.hpp"
#include "uavpheno/parallel.hpp"

namespace uavpheno {

void ExteriorOrientation::validate() const {
  const Eigen::Matrix3d gram = rotation * rotation.transpose();
  if (!((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-9)) {
    throw InputError("exterior orientation rotation is not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw InputError("exterior orientation rotation must have determinant +1");
  }
  if (!position.allFinite()) {
    throw InputError("exterior orientation position must be finite");
  }
}

namespace {

// Ideal (distortion-free) image coordinates relative to the principal point,
// or nullopt for points at or behind the projection centre.
std::optional<ImagePointMm> ideal_projection(const Eigen::Vector3d& ground,
                                             const ExteriorOrientation& eo,
                                             const SmacCamera& cam) {
  const Eigen::Vector3d p = eo.rotation * (ground - eo.position);
  const double depth = -p.z();
  if (!(depth > 1e-12)) {
    return std::nullopt;
  }
  return ImagePointMm{cam.focal * p.x() / depth, cam.focal * p.y() / depth};
}

}  // namespace

PixelPoint project_ground_to_image(const Eigen::Vector3d& ground, const ExteriorOrientation& eo,
                                   const SmacCamera& cam) {
  const auto ideal = ideal_projection(ground, eo, cam);
  if (!ideal) {
    std::ostringstream msg;
    msg << "ground point (" << ground.x() << ", " << ground.y() << ", " << ground.z()
        << ") is not in front of the camera";
    throw NumericError(msg.str());
  }
  const ImagePointMm raw = invert_correction(*ideal, cam);
  const auto [row, col] = mm_to_pixel(raw, cam);
  return {row, col};
}

std::optional<PixelPoint> try_project(const Eigen::Vector3d& ground, const ExteriorOrientation& eo,
                                      const SmacCamera& cam) {
  const auto ideal = ideal_projection(ground, eo, cam);
  if (!ideal) {
    return std::nullopt;
  }
  // Far outside the sensor the inverse distortion is meaningless; skip it.
  const double half_diag =
      0.5 * cam.pixel_pitch * std::hypot(cam.sensor_width, cam.sensor_height);
  if (std::hypot(ideal->x, ideal->y) > 2.0 * half_diag + std::hypot(cam.xp, cam.yp)) {
    return std::nullopt;
  }
  ImagePointMm raw;
  try {
    raw = invert_correction(*ideal, cam);
  } catch (const NumericError&) {
    return std::nullopt;
  }
  const auto [row, col] = mm_to_pixel(raw, cam);
  constexpr double kSlack = 1e-6;
  if (row < -kSlack || col < -kSlack || row > cam.sensor_height - 1 + kSlack ||
      col > cam.sensor_width - 1 + kSlack) {
    return std::nullopt;
  }
  return PixelPoint{row, col};
}

OrthoMosaic orthorectify(std::span<const OrthoSource> sources, const SmacCamera& cam,
                         const DemGrid& dem, double gsd, int threads) {
  if (sources.empty()) {
    throw InputError("orthorectify needs at least one image");
  }
  if (!(gsd > 0.0)) {
    throw ConfigError("orthophoto gsd must be > 0");
  }
  cam.validate();
  dem.validate();
  const int channels = sources.front().image.channels();
  for (const auto& s : sources) {
    s.eo.validate();
    if (s.image.width() != cam.sensor_width || s.image.height() != cam.sensor_height) {
      throw InputError("source image size does not match the camera sensor");
    }
    if (s.image.channels() != channels) {
      throw InputError("source images differ in channel count");
    }
  }

  OrthoMosaic mosaic;
  mosaic.gsd = gsd;
  mosaic.origin_x = dem.origin_x;
  mosaic.top_y = dem.origin_y + dem.ny * dem.cell;
  const int width = std::max(1, static_cast<int>(std::ceil(dem.nx * dem.cell / gsd - 1e-9)));
  const int height = std::max(1, static_cast<int>(std::ceil(dem.ny * dem.cell / gsd - 1e-9)));
  mosaic.image = RasterImage(width, height, channels);

  parallel_for_rows(height, threads, [&](int begin, int end) {
    for (int r = begin; r < end; ++r) {
      for (int c = 0; c < width; ++c) {
        const double x = mosaic.origin_x + (c + 0.5) * gsd;
        const double y = mosaic.top_y - (r + 0.5) * gsd;
        const Eigen::Vector3d ground(x, y, dem.elevation(x, y));

        const OrthoSource* chosen = nullptr;
        PixelPoint where;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : sources) {
          const double d = (s.eo.position - ground).norm();
          if (d >= best) {
            continue;
          }
          if (const auto px = try_project(ground, s.eo, cam)) {
            best = d;
            chosen = &s;
            where = *px;
          }
        }
        if (chosen == nullptr) {
          continue;
        }
        for (int ch = 0; ch < channels; ++ch) {
          const double v = sample_bilinear(chosen->image, where.row, where.col, ch, 0.0);
          mosaic.image.at(r, c, ch) = static_cast<std::uint8_t>(std::lround(v));
        }
      }
    }
  });
  return mosaic;
}

ExteriorOrientation transform_exterior(const ExteriorOrientation& eo, const Similarity3D& t) {
  ExteriorOrientation out;
  out.position = t.apply(eo.position);
  out.rotation = eo.rotation * t.rotation.transpose();
  return out;
}

}  // namespace uavpheno
