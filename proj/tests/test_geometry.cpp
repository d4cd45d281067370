#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "uavpheno/dem.hpp"
#include "uavpheno/error.hpp"
#include "uavpheno/geometry_io.hpp"
#include "uavpheno/ortho.hpp"
#include "uavpheno/rng.hpp"

namespace uavpheno {
namespace {

TEST(InterpolateDem, ConstantCloud) {
  std::vector<Eigen::Vector3d> pts;
  Rng rng(1);
  for (int k = 0; k < 30; ++k) {
    pts.emplace_back(rng.uniform(0, 10), rng.uniform(0, 10), 5.0);
  }
  const DemGrid dem = interpolate_dem(pts, 0.0, 0.0, 1.0, 10, 10);
  for (double z : dem.z) {
    EXPECT_DOUBLE_EQ(z, 5.0);
  }
}

TEST(InterpolateDem, SinglePoint) {
  const std::vector<Eigen::Vector3d> pts{{2.0, 7.0, 3.0}};
  const DemGrid dem = interpolate_dem(pts, 0.0, 0.0, 2.0, 4, 3);
  for (double z : dem.z) {
    EXPECT_DOUBLE_EQ(z, 3.0);
  }
}

TEST(InterpolateDem, SymmetricWeights) {
  const std::vector<Eigen::Vector3d> pts{{0.0, 0.0, 0.0}, {10.0, 0.0, 10.0}};
  const DemGrid dem = interpolate_dem(pts, 4.5, -0.5, 1.0, 1, 1);
  EXPECT_NEAR(dem.at(0, 0), 5.0, 1e-12);
}

TEST(InterpolateDem, CoincidentCentreTakesThePoint) {
  const std::vector<Eigen::Vector3d> pts{{0.5, 0.5, 7.0}, {3.0, 3.0, -1.0}};
  const DemGrid dem = interpolate_dem(pts, 0.0, 0.0, 1.0, 4, 4);
  EXPECT_DOUBLE_EQ(dem.at(0, 0), 7.0);
}

TEST(InterpolateDem, MatchesBruteForceIdw) {
  Rng rng(2);
  std::vector<Eigen::Vector3d> pts;
  for (int k = 0; k < 40; ++k) {
    pts.emplace_back(rng.uniform(0, 20), rng.uniform(0, 20), rng.uniform(-3, 3));
  }
  const IdwOptions opts{40, 2.0};  // all points: no neighbour selection to reproduce
  const DemGrid dem = interpolate_dem(pts, 0.0, 0.0, 2.5, 8, 8, opts);
  for (int iy = 0; iy < 8; ++iy) {
    for (int ix = 0; ix < 8; ++ix) {
      const Eigen::Vector2d c = dem.cell_center(ix, iy);
      double num = 0.0, den = 0.0;
      for (const auto& p : pts) {
        const double w = 1.0 / (c - p.head<2>()).squaredNorm();
        num += w * p.z();
        den += w;
      }
      EXPECT_NEAR(dem.at(ix, iy), num / den, 1e-9);
    }
  }
}

TEST(InterpolateDem, Errors) {
  EXPECT_THROW(interpolate_dem({}, 0, 0, 1, 1, 1), InputError);
  const std::vector<Eigen::Vector3d> pts{{0, 0, 0}};
  EXPECT_THROW(interpolate_dem(pts, 0, 0, 0.0, 1, 1), ConfigError);
  EXPECT_THROW(interpolate_dem(pts, 0, 0, 1.0, 0, 1), ConfigError);
}

TEST(DemGrid, BilinearElevationBetweenCentres) {
  DemGrid dem;
  dem.nx = 2;
  dem.ny = 2;
  dem.z = {0.0, 2.0, 4.0, 6.0};  // south row then north row
  EXPECT_DOUBLE_EQ(dem.elevation(1.0, 1.0), 3.0);
  EXPECT_DOUBLE_EQ(dem.elevation(0.5, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(dem.elevation(-5.0, 9.0), 4.0);  // clamped
}

SmacCamera nadir_camera(double focal) {
  SmacCamera cam;
  cam.focal = focal;
  cam.pixel_pitch = 0.01;
  cam.sensor_width = 200;
  cam.sensor_height = 200;
  return cam;
}

ExteriorOrientation camera_at(double x, double y, double z) {
  ExteriorOrientation eo;
  eo.position = {x, y, z};
  return eo;
}

TEST(ProjectGroundToImage, OnAxisRayHitsThePrincipalPoint) {
  const SmacCamera cam = nadir_camera(3.0);
  const auto px = project_ground_to_image({0, 0, 0}, camera_at(0, 0, 20), cam);
  EXPECT_NEAR(px.row, 99.5, 1e-12);
  EXPECT_NEAR(px.col, 99.5, 1e-12);
}

TEST(ProjectGroundToImage, SimilarTriangles) {
  const SmacCamera cam = nadir_camera(3.0);
  const auto px = project_ground_to_image({2, 0, 0}, camera_at(0, 0, 20), cam);
  const ImagePointMm mm = pixel_to_mm(px.row, px.col, cam);
  EXPECT_NEAR(mm.x, 0.3, 1e-12);
  EXPECT_NEAR(mm.y, 0.0, 1e-12);
}

TEST(ProjectGroundToImage, NorthIsUpTheImage) {
  const SmacCamera cam = nadir_camera(3.0);
  const auto px = project_ground_to_image({0, 2, 0}, camera_at(0, 0, 20), cam);
  EXPECT_LT(px.row, 99.5);
}

TEST(ProjectGroundToImage, PointAtCameraHeightFails) {
  const SmacCamera cam = nadir_camera(3.0);
  EXPECT_THROW(project_ground_to_image({5, 0, 20}, camera_at(0, 0, 20), cam), NumericError);
  EXPECT_FALSE(try_project({5, 0, 20}, camera_at(0, 0, 20), cam).has_value());
}

TEST(ProjectGroundToImage, DistortionIsUndoneByTheCorrection) {
  SmacCamera cam = nadir_camera(3.0);
  cam.k1 = 5e-3;
  cam.xp = 0.01;
  const auto px = project_ground_to_image({3, -2, 0}, camera_at(0, 0, 20), cam);
  const ImagePointMm corrected = correct_point(pixel_to_mm(px.row, px.col, cam), cam);
  EXPECT_NEAR(corrected.x, 3.0 * 3.0 / 20.0, 1e-6);
  EXPECT_NEAR(corrected.y, -2.0 * 3.0 / 20.0, 1e-6);
}

TEST(TransformExterior, ProjectionIsInvariant) {
  const SmacCamera cam = nadir_camera(3.0);
  ExteriorOrientation eo = camera_at(1, -2, 30);
  eo.rotation = Eigen::AngleAxisd(0.1, Eigen::Vector3d(1, 2, 0.5).normalized()).toRotationMatrix();
  Similarity3D t;
  t.scale = 1.7;
  t.rotation = Eigen::AngleAxisd(0.8, Eigen::Vector3d(0.2, -0.3, 1).normalized()).toRotationMatrix();
  t.translation = {500, 200, 40};
  const ExteriorOrientation mapped = transform_exterior(eo, t);
  for (const Eigen::Vector3d& g : {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(4, 3, 1),
                                  Eigen::Vector3d(-2, 5, -1)}) {
    const auto a = project_ground_to_image(g, eo, cam);
    const auto b = project_ground_to_image(t.apply(g), mapped, cam);
    EXPECT_NEAR(a.row, b.row, 1e-9);
    EXPECT_NEAR(a.col, b.col, 1e-9);
  }
}

TEST(ExteriorOrientation, RejectsImproperRotation) {
  ExteriorOrientation eo;
  eo.rotation(0, 0) = -1.0;
  EXPECT_THROW(eo.validate(), InputError);
}

DemGrid flat_dem(double ox, double oy, double cell, int nx, int ny) {
  DemGrid dem;
  dem.origin_x = ox;
  dem.origin_y = oy;
  dem.cell = cell;
  dem.nx = nx;
  dem.ny = ny;
  dem.z.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  return dem;
}

TEST(Orthorectify, NearestCameraWins) {
  const SmacCamera cam = nadir_camera(0.5);  // half-footprint 100 m at 50 m height
  std::vector<OrthoSource> src{{RasterImage(200, 200, 1), camera_at(0, 0, 50)},
                               {RasterImage(200, 200, 1), camera_at(100, 0, 50)}};
  std::fill(src[0].image.samples().begin(), src[0].image.samples().end(), 50);
  std::fill(src[1].image.samples().begin(), src[1].image.samples().end(), 200);
  const auto near_first = orthorectify(src, cam, flat_dem(9.5, -0.5, 1.0, 1, 1), 1.0);
  EXPECT_EQ(near_first.image.at(0, 0), 50);
  const auto near_second = orthorectify(src, cam, flat_dem(59.5, -0.5, 1.0, 1, 1), 1.0);
  EXPECT_EQ(near_second.image.at(0, 0), 200);
}

TEST(Orthorectify, UncoveredCellsAreBlack) {
  const SmacCamera cam = nadir_camera(0.5);
  std::vector<OrthoSource> src{{RasterImage(200, 200, 1), camera_at(0, 0, 50)}};
  std::fill(src[0].image.samples().begin(), src[0].image.samples().end(), 99);
  const auto mosaic = orthorectify(src, cam, flat_dem(500, 0, 1.0, 3, 3), 1.0);
  for (auto s : mosaic.image.samples()) {
    EXPECT_EQ(s, 0);
  }
}

TEST(Orthorectify, GeoreferenceAndSize) {
  const SmacCamera cam = nadir_camera(0.5);
  std::vector<OrthoSource> src{{RasterImage(200, 200, 3), camera_at(0, 0, 50)}};
  const auto mosaic = orthorectify(src, cam, flat_dem(-10, -20, 2.0, 10, 5), 0.5);
  EXPECT_EQ(mosaic.image.width(), 40);
  EXPECT_EQ(mosaic.image.height(), 20);
  EXPECT_EQ(mosaic.image.channels(), 3);
  EXPECT_DOUBLE_EQ(mosaic.origin_x, -10.0);
  EXPECT_DOUBLE_EQ(mosaic.top_y, -10.0);
}

TEST(GeometryIo, CorrespondenceRoundTrip) {
  const std::vector<Correspondence2D> m{{{1.5, 2}, {3, 4.25}}, {{-1, 0}, {0, 1e-3}}};
  const auto back = parse_correspondences(format_correspondences(m));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].b.y, 1e-3);
  EXPECT_EQ(back[0].a.x, 1.5);
  EXPECT_THROW(parse_correspondences("a,b\n1,2\n"), InputError);
}

TEST(GeometryIo, EopRoundTrip) {
  EopRecord rec{"img_01.png", camera_at(1, 2, 3)};
  rec.eo.rotation = Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const auto back = parse_eops(format_eops({rec}));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].image, "img_01.png");
  EXPECT_TRUE(back[0].eo.rotation.isApprox(rec.eo.rotation, 1e-15));
  EXPECT_EQ(back[0].eo.position, rec.eo.position);
}

TEST(GeometryIo, DemRoundTrip) {
  DemGrid dem = flat_dem(10, 20, 0.5, 3, 2);
  dem.z = {1, 2, 3, 4, 5, 6.5};
  const DemGrid back = parse_dem_csv(format_dem_csv(dem));
  EXPECT_EQ(back.nx, 3);
  EXPECT_EQ(back.ny, 2);
  EXPECT_EQ(back.z, dem.z);
  EXPECT_EQ(back.origin_y, 20.0);
}

TEST(GeometryIo, GcpAndCloud) {
  const auto gcps = parse_gcps("Xlocal,Ylocal,Zlocal,Xmap,Ymap,Zmap\n1,2,3,4,5,6\n");
  ASSERT_EQ(gcps.size(), 1u);
  EXPECT_EQ(gcps[0].mapping.z(), 6.0);
  const std::vector<Eigen::Vector3d> pts{{1, 2, 3}, {-4, 5.5, 0}};
  EXPECT_EQ(parse_point_cloud(format_point_cloud(pts)), pts);
}

}  // namespace
}  // namespace uavpheno
