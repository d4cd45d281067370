#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "uavpheno/raster.hpp"
#include "uavpheno/segmentation.hpp"

namespace uavpheno {

/// Real-valued plant position in pixels (row i, column j).
struct PlantPoint {
  double i = 0.0;
  double j = 0.0;

  bool operator==(const PlantPoint&) const = default;
};

using PlantConfiguration = std::vector<PlantPoint>;

/// Line membership of each plant. A row is a horizontal line of plants
/// (roughly constant i), a column a vertical one (roughly constant j).
struct RowColumnAssignment {
  std::vector<int> row_of;
  std::vector<int> col_of;

  void validate(std::size_t plants) const;
};

/// Leave-one-out Gaussian prior for one plant. A sigma of +inf drops that
/// axis from the prior.
struct PriorEntry {
  double mu_i = 0.0;
  double mu_j = 0.0;
  double sigma_i = std::numeric_limits<double>::infinity();
  double sigma_j = std::numeric_limits<double>::infinity();
};

enum class LocalizationMode { Full, NoPrior, NoIntraRow };

LocalizationMode parse_localization_mode(const std::string& name);
std::string to_string(LocalizationMode mode);

/// Coordinates of all leaf pixels, row-major. Throws InputError when the
/// mask is empty.
std::vector<PixelCoord> build_pixel_set(const LeafMask& mask);

struct NearestPlant {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Closest plant to z; ties go to the lower index. Throws InputError if x
/// is empty.
NearestPlant nearest_plant(PixelCoord z, const PlantConfiguration& x);

/// N ln(sigma) + sum(d_n) / sigma.
double neg_log_likelihood(const std::vector<PixelCoord>& zset, const PlantConfiguration& x,
                          double sigma);

/// Mean and sample deviation of the other members of p's row (i axis) and
/// column (j axis), deviations floored at sigma_floor. An axis with no
/// other member gets an infinite sigma; one other member gives a zero
/// deviation, which the floor lifts.
PriorEntry prior_params(const PlantConfiguration& x, const RowColumnAssignment& assign,
                        std::size_t p, double sigma_floor);

/// Half the squared Mahalanobis distance of `candidate` to the prior mean,
/// restricted by the mode.
double prior_cost(const PlantPoint& candidate, const PriorEntry& prior, LocalizationMode mode);

/// sum(d_n) / sigma with plant p moved to `candidate`, plus prior_cost.
double map_cost(std::size_t p, const PlantPoint& candidate, const std::vector<PixelCoord>& zset,
                const PlantConfiguration& x, double sigma, const PriorEntry& prior,
                LocalizationMode mode);

/// Centroid of the pixels whose nearest plant is p. Throws NumericError
/// when p owns no pixel.
PlantPoint kmeans_update(const std::vector<PixelCoord>& zset, const PlantConfiguration& x,
                         std::size_t p);

/// Mean nearest-plant distance, floored at sigma_floor.
double estimate_sigma(const std::vector<PixelCoord>& zset, const PlantConfiguration& x,
                      double sigma_floor);

/// map_cost over the integer window [round(x_p) - w, round(x_p) + w]^2,
/// row-major, evaluated incrementally. Candidates outside the image get
/// +inf.
struct CostMap {
  int i0 = 0;
  int j0 = 0;
  int size = 0;
  std::vector<double> cost;

  double at(int di, int dj) const { return cost[static_cast<std::size_t>(di * size + dj)]; }
};

CostMap cost_map(std::size_t p, const std::vector<PixelCoord>& zset, const PlantConfiguration& x,
                 double sigma, const PriorEntry& prior, LocalizationMode mode, int window,
                 int image_width, int image_height, int threads = 1);

struct IcdConfig {
  LocalizationMode mode = LocalizationMode::Full;
  int window = 40;
  int sweeps = 50;
  double epsilon = 1e-6;
  double sigma_floor = 0.5;
  int threads = 1;

  void validate() const;
};

struct EmptyClusterEvent {
  int sweep = 0;
  std::size_t plant = 0;
};

struct IcdResult {
  PlantConfiguration plants;
  double sigma = 0.0;
  /// Objective after every accepted update, preceded in each sweep by the
  /// objective at the start of that sweep. sigma and priors are fixed inside
  /// a sweep, so each sweep's stretch is non-increasing.
  std::vector<double> trace;
  /// Index into `trace` where each sweep starts.
  std::vector<std::size_t> sweep_start;
  std::vector<EmptyClusterEvent> empty_clusters;
  int sweeps = 0;
  bool converged = false;
  /// Stopped because a sweep ended in a configuration seen before.
  bool cycled = false;
};

/// Full objective at fixed sigma and priors: N ln sigma + sum(d)/sigma +
/// sum_p prior_cost(x_p).
double total_cost(const std::vector<PixelCoord>& zset, const PlantConfiguration& x, double sigma,
                  const std::vector<PriorEntry>& priors, LocalizationMode mode);

/// Iterative coordinate descent: plants are updated one at a time in index
/// order, each moved to the best integer candidate in its window if that
/// strictly lowers the cost. sigma and the priors are refreshed after every
/// sweep. Stops when a sweep gains less than epsilon, accepts nothing,
/// revisits an earlier configuration, or the sweep limit is reached.
IcdResult icd_optimize(const std::vector<PixelCoord>& zset, const PlantConfiguration& x0,
                       const RowColumnAssignment& assign, const IcdConfig& config,
                       int image_width, int image_height);

/// Rectangular tile processed on its own. Plants whose initial position
/// falls inside belong to it.
struct Region {
  int i0 = 0;
  int j0 = 0;
  int height = 0;
  int width = 0;
};

/// Splits the mask into regions, runs ICD in each, and stitches the
/// results back in the original plant order. An empty list means the
/// whole image. Every plant must fall in exactly one region, and every
/// region with plants must contain leaf pixels.
PlantConfiguration locate_plants(const LeafMask& mask, const PlantConfiguration& x0,
                                 const RowColumnAssignment& assign, const IcdConfig& config,
                                 const std::vector<Region>& regions,
                                 std::vector<IcdResult>* per_region = nullptr);

/// Groups 1-D coordinates into lines: sorted values split wherever the gap
/// exceeds `gap`. Returns a line id per value, ids increasing with the
/// coordinate.
std::vector<int> cluster_lines(const std::vector<double>& values, double gap);

}  // namespace uavpheno
