#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace uavpheno {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Conjugate point pair: `a` in image 1, `b` in image 2, both in pixels.
struct Correspondence2D {
  Point2 a;
  Point2 b;
};

/// b = scale * R(kappa) * a + t.
///
/// Relative orientation of two nadir images taken at the same altitude over
/// flat ground reduces to this 4-parameter map.
struct Similarity2D {
  double scale = 1.0;
  double kappa = 0.0;  // radians, in (-pi, pi]
  Point2 t;

  Point2 apply(Point2 a) const noexcept;
};

/// Exact similarity through two correspondences. Throws NumericError when the
/// two `a` points coincide.
Similarity2D estimate_rop_two_point(const Correspondence2D& c1, const Correspondence2D& c2);

/// Least-squares similarity over all given correspondences (>= 2, not all
/// `a` coincident).
Similarity2D fit_similarity_2d(std::span<const Correspondence2D> matches);

struct RansacOptions {
  double threshold = 1.0;  // pixels
  int iterations = 500;
  std::uint64_t seed = 0;
};

struct RansacResult {
  Similarity2D model;
  std::vector<std::size_t> inliers;  // ascending
};

/// Robust relative orientation. Each iteration draws a 2-point sample from
/// its own RNG stream derived from (seed, iteration), scores inliers by
/// reprojection distance |model(a) - b| <= threshold and keeps the sample with
/// the most inliers (ties: smaller residual sum, then earlier iteration). The
/// winner is refit by least squares to its inliers until the inlier set is
/// stable; reported inliers are those of the final model.
RansacResult ransac_rop(std::span<const Correspondence2D> matches, const RansacOptions& opts);

/// p_mapping = scale * rotation * p_local + translation.
struct Similarity3D {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return scale * rotation * p + translation; }
};

/// Closed-form least-squares 7-parameter similarity (SVD of the cross
/// covariance). Throws InputError on fewer than 3 pairs or unequal lengths and
/// NumericError when the local points are collinear.
Similarity3D absolute_orientation(std::span<const Eigen::Vector3d> local,
                                  std::span<const Eigen::Vector3d> mapping);

/// Root-mean-square of |T(local) - mapping|.
double rms_residual(const Similarity3D& t, std::span<const Eigen::Vector3d> local,
                    std::span<const Eigen::Vector3d> mapping);

}  // namespace uavpheno
