#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace uavpheno {

/// Regular elevation grid. `origin` is the lower-left (min X, min Y) corner;
/// cell (ix, iy) is centred at origin + ((ix + 0.5) * cell, (iy + 0.5) * cell)
/// and stored at z[iy * nx + ix], so rows run south to north.
struct DemGrid {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell = 1.0;
  int nx = 0;
  int ny = 0;
  std::vector<double> z;

  double at(int ix, int iy) const { return z[static_cast<std::size_t>(iy) * nx + ix]; }
  Eigen::Vector2d cell_center(int ix, int iy) const {
    return {origin_x + (ix + 0.5) * cell, origin_y + (iy + 0.5) * cell};
  }
  /// Bilinear interpolation between cell centres, clamped to the outermost
  /// centres outside the grid.
  double elevation(double x, double y) const;
  /// Throws InputError unless cell > 0, nx, ny >= 1, z has nx*ny finite values.
  void validate() const;
};

struct IdwOptions {
  int neighbours = 8;
  double power = 2.0;
};

/// Inverse-distance-weighted grid over the `neighbours` nearest cloud points
/// (planimetric distance). A cell centre that coincides with a cloud point
/// takes that point's Z. Throws InputError for an empty cloud and
/// ConfigError for a bad grid.
DemGrid interpolate_dem(std::span<const Eigen::Vector3d> cloud, double origin_x,
                        double origin_y, double cell, int nx, int ny, IdwOptions opts = {});

}  // namespace uavpheno
