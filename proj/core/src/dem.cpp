#include "uavpheno/dem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uavpheno/error.hpp"

namespace uavpheno {

void DemGrid::validate() const {
  if (!(cell > 0.0) || nx < 1 || ny < 1) {
    throw InputError("DEM needs cell > 0 and at least one cell per axis");
  }
  if (z.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
    throw InputError("DEM holds " + std::to_string(z.size()) + " values, expected " +
                     std::to_string(nx * ny));
  }
  for (double v : z) {
    if (!std::isfinite(v)) {
      throw InputError("DEM contains a non-finite elevation");
    }
  }
}

double DemGrid::elevation(double x, double y) const {
  const double fx = std::clamp((x - origin_x) / cell - 0.5, 0.0, static_cast<double>(nx - 1));
  const double fy = std::clamp((y - origin_y) / cell - 0.5, 0.0, static_cast<double>(ny - 1));
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const int x1 = std::min(x0 + 1, nx - 1);
  const int y1 = std::min(y0 + 1, ny - 1);
  const double tx = fx - x0;
  const double ty = fy - y0;
  const double south = (1.0 - tx) * at(x0, y0) + tx * at(x1, y0);
  const double north = (1.0 - tx) * at(x0, y1) + tx * at(x1, y1);
  return (1.0 - ty) * south + ty * north;
}

DemGrid interpolate_dem(std::span<const Eigen::Vector3d> cloud, double origin_x,
                        double origin_y, double cell, int nx, int ny, IdwOptions opts) {
  if (cloud.empty()) {
    throw InputError("DEM interpolation needs a non-empty point cloud");
  }
  if (!(cell > 0.0) || nx < 1 || ny < 1) {
    throw ConfigError("DEM grid needs cell > 0 and nx, ny >= 1");
  }
  if (opts.neighbours < 1 || !(opts.power > 0.0)) {
    throw ConfigError("IDW needs neighbours >= 1 and power > 0");
  }

  DemGrid dem{origin_x, origin_y, cell, nx, ny, {}};
  dem.z.resize(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(opts.neighbours), cloud.size());

  std::vector<std::pair<double, std::size_t>> dist(cloud.size());
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const Eigen::Vector2d c = dem.cell_center(ix, iy);
      for (std::size_t p = 0; p < cloud.size(); ++p) {
        dist[p] = {(cloud[p].head<2>() - c).squaredNorm(), p};
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

      double value;
      if (dist[0].first == 0.0) {
        value = cloud[dist[0].second].z();
      } else {
        double wsum = 0.0;
        double zsum = 0.0;
        for (std::size_t q = 0; q < k; ++q) {
          const double w = std::pow(dist[q].first, -0.5 * opts.power);
          wsum += w;
          zsum += w * cloud[dist[q].second].z();
        }
        value = zsum / wsum;
      }
      dem.z[static_cast<std::size_t>(iy) * nx + ix] = value;
    }
  }
  return dem;
}

}  // namespace uavpheno
