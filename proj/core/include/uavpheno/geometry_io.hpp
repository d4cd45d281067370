#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavpheno/dem.hpp"
#include "uavpheno/orientation.hpp"
#include "uavpheno/ortho.hpp"

namespace uavpheno {

/// CSV with header `x1,y1,x2,y2`.
std::vector<Correspondence2D> parse_correspondences(const std::string& text);
std::vector<Correspondence2D> read_correspondences(const std::filesystem::path& path);
std::string format_correspondences(const std::vector<Correspondence2D>& matches);

struct EopRecord {
  std::string image;
  ExteriorOrientation eo;
};

/// JSON array of {image, position: [X,Y,Z], rotation: [9 numbers, row-major]}.
std::vector<EopRecord> parse_eops(const std::string& text);
std::vector<EopRecord> read_eops(const std::filesystem::path& path);
std::string format_eops(const std::vector<EopRecord>& eops);

struct GcpPair {
  Eigen::Vector3d local;
  Eigen::Vector3d mapping;
};

/// CSV with header `Xlocal,Ylocal,Zlocal,Xmap,Ymap,Zmap`.
std::vector<GcpPair> parse_gcps(const std::string& text);
std::vector<GcpPair> read_gcps(const std::filesystem::path& path);

/// CSV with header `X,Y,Z`.
std::vector<Eigen::Vector3d> parse_point_cloud(const std::string& text);
std::vector<Eigen::Vector3d> read_point_cloud(const std::filesystem::path& path);
std::string format_point_cloud(const std::vector<Eigen::Vector3d>& cloud);

/// Four header lines `origin_x,<v>`, `origin_y,<v>`, `cell,<v>`, `nx,<n>`
/// followed by ny rows of nx comma-separated elevations. Row k holds iy = k,
/// so the first data row is the southern edge.
DemGrid parse_dem_csv(const std::string& text);
DemGrid read_dem_csv(const std::filesystem::path& path);
std::string format_dem_csv(const DemGrid& dem);

std::string similarity2d_to_json(const Similarity2D& s);
std::string similarity3d_to_json(const Similarity3D& s);

}  // namespace uavpheno
