#include "uavpheno/orientation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/SVD>
#include <Eigen/Eigenvalues>

#include "uavpheno/error.hpp"
#include "uavpheno/rng.hpp"

namespace uavpheno {

namespace {

using Complex = std::complex<double>;

Complex to_complex(Point2 p) noexcept { return {p.x, p.y}; }

Similarity2D from_complex(Complex z, Complex t) noexcept {
  Similarity2D s;
  s.scale = std::abs(z);
  s.kappa = std::arg(z);
  s.t = {t.real(), t.imag()};
  return s;
}

double residual(const Similarity2D& model, const Correspondence2D& c) noexcept {
  const Point2 p = model.apply(c.a);
  return std::hypot(p.x - c.b.x, p.y - c.b.y);
}

struct Score {
  std::size_t count = 0;
  double residual_sum = 0.0;
};

Score score_model(const Similarity2D& model, std::span<const Correspondence2D> matches,
                  double threshold) noexcept {
  Score s;
  for (const auto& c : matches) {
    const double r = residual(model, c);
    if (r <= threshold) {
      ++s.count;
      s.residual_sum += r;
    }
  }
  return s;
}

std::vector<std::size_t> collect_inliers(const Similarity2D& model,
                                         std::span<const Correspondence2D> matches,
                                         double threshold) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < matches.size(); ++k) {
    if (residual(model, matches[k]) <= threshold) {
      idx.push_back(k);
    }
  }
  return idx;
}

}  // namespace

Point2 Similarity2D::apply(Point2 a) const noexcept {
  const double c = scale * std::cos(kappa);
  const double s = scale * std::sin(kappa);
  return {c * a.x - s * a.y + t.x, s * a.x + c * a.y + t.y};
}

Similarity2D estimate_rop_two_point(const Correspondence2D& c1, const Correspondence2D& c2) {
  const Complex da = to_complex(c2.a) - to_complex(c1.a);
  if (std::abs(da) == 0.0) {
    throw NumericError("two-point relative orientation: coincident image-1 points");
  }
  const Complex z = (to_complex(c2.b) - to_complex(c1.b)) / da;
  const Complex t = to_complex(c1.b) - z * to_complex(c1.a);
  return from_complex(z, t);
}

Similarity2D fit_similarity_2d(std::span<const Correspondence2D> matches) {
  if (matches.size() < 2) {
    throw InputError("similarity fit needs at least 2 correspondences");
  }
  Complex mean_a = 0.0;
  Complex mean_b = 0.0;
  for (const auto& c : matches) {
    mean_a += to_complex(c.a);
    mean_b += to_complex(c.b);
  }
  const double n = static_cast<double>(matches.size());
  mean_a /= n;
  mean_b /= n;
  Complex num = 0.0;
  double den = 0.0;
  for (const auto& c : matches) {
    const Complex a = to_complex(c.a) - mean_a;
    const Complex b = to_complex(c.b) - mean_b;
    num += b * std::conj(a);
    den += std::norm(a);
  }
  if (den == 0.0) {
    throw NumericError("similarity fit: all image-1 points coincide");
  }
  const Complex z = num / den;
  return from_complex(z, mean_b - z * mean_a);
}

RansacResult ransac_rop(std::span<const Correspondence2D> matches, const RansacOptions& opts) {
  if (matches.size() < 2) {
    throw InputError("RANSAC needs at least 2 correspondences, got " +
                     std::to_string(matches.size()));
  }
  if (!(opts.threshold > 0.0)) {
    throw ConfigError("RANSAC threshold must be > 0");
  }
  if (opts.iterations < 1) {
    throw ConfigError("RANSAC iterations must be >= 1");
  }

  const std::uint64_t n = matches.size();
  bool found = false;
  Similarity2D best;
  Score best_score;
  for (int it = 0; it < opts.iterations; ++it) {
    Rng rng(splitmix64(opts.seed ^ splitmix64(static_cast<std::uint64_t>(it))));
    const std::uint64_t i = rng.uniform_index(n);
    std::uint64_t j = rng.uniform_index(n - 1);
    if (j >= i) {
      ++j;
    }
    const auto& ci = matches[i];
    const auto& cj = matches[j];
    if (ci.a.x == cj.a.x && ci.a.y == cj.a.y) {
      continue;
    }
    const Similarity2D model = estimate_rop_two_point(ci, cj);
    const Score s = score_model(model, matches, opts.threshold);
    if (!found || s.count > best_score.count ||
        (s.count == best_score.count && s.residual_sum < best_score.residual_sum)) {
      found = true;
      best = model;
      best_score = s;
    }
  }
  if (!found || best_score.count < 2) {
    throw NumericError("RANSAC found no model with at least 2 inliers");
  }

  RansacResult result{best, collect_inliers(best, matches, opts.threshold)};
  for (int refit = 0; refit < 20; ++refit) {
    std::vector<Correspondence2D> subset;
    subset.reserve(result.inliers.size());
    for (std::size_t k : result.inliers) {
      subset.push_back(matches[k]);
    }
    const Similarity2D model = fit_similarity_2d(subset);
    auto inliers = collect_inliers(model, matches, opts.threshold);
    if (inliers.size() < 2) {
      break;
    }
    const bool stable = inliers == result.inliers;
    result = {model, std::move(inliers)};
    if (stable) {
      break;
    }
  }
  return result;
}

Similarity3D absolute_orientation(std::span<const Eigen::Vector3d> local,
                                  std::span<const Eigen::Vector3d> mapping) {
  if (local.size() != mapping.size()) {
    throw InputError("absolute orientation: point lists differ in length");
  }
  if (local.size() < 3) {
    throw InputError("absolute orientation needs at least 3 point pairs");
  }
  const double n = static_cast<double>(local.size());
  Eigen::Vector3d mean_p = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_q = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < local.size(); ++k) {
    mean_p += local[k];
    mean_q += mapping[k];
  }
  mean_p /= n;
  mean_q /= n;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  double var_p = 0.0;
  for (std::size_t k = 0; k < local.size(); ++k) {
    const Eigen::Vector3d p = local[k] - mean_p;
    const Eigen::Vector3d q = mapping[k] - mean_q;
    cross += q * p.transpose();
    scatter += p * p.transpose();
    var_p += p.squaredNorm();
  }
  cross /= n;
  scatter /= n;
  var_p /= n;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
  if (!(ev(2) > 0.0) || ev(1) <= 1e-12 * ev(2)) {
    throw NumericError("absolute orientation: local points are collinear");
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& U = svd.matrixU();
  const Eigen::Matrix3d& V = svd.matrixV();
  Eigen::Vector3d sign(1.0, 1.0, 1.0);
  if (U.determinant() * V.determinant() < 0.0) {
    sign(2) = -1.0;
  }
  Similarity3D t;
  t.rotation = U * sign.asDiagonal() * V.transpose();
  t.scale = svd.singularValues().dot(sign) / var_p;
  t.translation = mean_q - t.scale * t.rotation * mean_p;
  return t;
}

double rms_residual(const Similarity3D& t, std::span<const Eigen::Vector3d> local,
                    std::span<const Eigen::Vector3d> mapping) {
  if (local.empty() || local.size() != mapping.size()) {
    throw InputError("rms_residual: point lists must be non-empty and of equal length");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < local.size(); ++k) {
    sum += (t.apply(local[k]) - mapping[k]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(local.size()));
}

}  // namespace uavpheno
