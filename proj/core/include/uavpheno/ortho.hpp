#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "uavpheno/dem.hpp"
#include "uavpheno/lens.hpp"
#include "uavpheno/orientation.hpp"
#include "uavpheno/raster.hpp"

namespace uavpheno {

/// Camera pose in the mapping frame. `rotation` maps world vectors into the
/// camera frame; the camera looks down its own -Z axis with +x right, +y up.
struct ExteriorOrientation {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  /// Throws InputError unless rotation is orthonormal to 1e-9 with det +1.
  void validate() const;
};

/// Fractional pixel position (row down, col right).
/// Re-expresses a pose given in a local frame in the frame reached by `t`
/// (local -> mapping). Scale changes the position only.
ExteriorOrientation transform_exterior(const ExteriorOrientation& eo, const Similarity3D& t);

struct PixelPoint {
  double row = 0.0;
  double col = 0.0;
};

/// Collinearity projection of a ground point into the raw (distorted) image.
/// Throws NumericError when the point is at or behind the projection centre,
/// and propagates inversion failures.
PixelPoint project_ground_to_image(const Eigen::Vector3d& ground, const ExteriorOrientation& eo,
                                   const SmacCamera& cam);

/// Like project_ground_to_image, but returns nullopt instead of throwing and
/// also when the projection falls outside the sensor.
std::optional<PixelPoint> try_project(const Eigen::Vector3d& ground, const ExteriorOrientation& eo,
                                      const SmacCamera& cam);

struct OrthoSource {
  RasterImage image;
  ExteriorOrientation eo;
};

/// North-up mosaic covering the DEM footprint. Pixel (r, c) is centred at
/// X = origin_x + (c + 0.5) * gsd, Y = top_y - (r + 0.5) * gsd.
struct OrthoMosaic {
  RasterImage image;
  double origin_x = 0.0;
  double top_y = 0.0;
  double gsd = 1.0;
};

/// Backward-projection orthophoto. For every output cell the ground point
/// takes its elevation from the DEM, each image that sees it is a candidate,
/// and the one whose projection centre is nearest in 3D is bilinearly
/// sampled. Cells seen by no image are black.
OrthoMosaic orthorectify(std::span<const OrthoSource> sources, const SmacCamera& cam,
                         const DemGrid& dem, double gsd, int threads = 1);

}  // namespace uavpheno
