#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "uavpheno/localization.hpp"
#include "uavpheno/raster.hpp"
#include "uavpheno/segmentation.hpp"

namespace uavpheno {

/// Parameters of a synthetic plot. Plants sit on a rows x cols grid: grid
/// row r is a horizontal line at i = i0 + r * intra_row, grid column c a
/// vertical crop row at j = j0 + c * inter_row, with the grid centred in
/// the image. Every random draw comes from `seed`.
struct FieldSpec {
  int rows = 4;
  int cols = 6;
  double inter_row = 80.0;  // px between crop rows (along j)
  double intra_row = 70.0;  // px between plants in a crop row (along i)
  double jitter_i = 2.0;
  double jitter_j = 2.0;
  int leaves_per_plant = 10;
  double leaf_length = 24.0;
  double leaf_width = 6.0;
  double radial_scale = 10.0;  // mean of the exponential leaf-centre offset
  int width = 560;
  int height = 360;
  std::uint64_t seed = 1;
  SegmentationThresholds thresholds;  // leaf hues are drawn inside this band

  void validate() const;
};

FieldSpec parse_field_spec(const std::string& json_text);
FieldSpec load_field_spec(const std::string& path);
std::string field_spec_to_json(const FieldSpec& spec);

/// Rectangle leaf: centre, long-axis angle (radians, from +x towards +y
/// with y up, [0, pi)), full length and width in pixels.
struct LeafShape {
  int plant = -1;  // -1 for leaves not attached to a plant
  double ci = 0.0;
  double cj = 0.0;
  double angle = 0.0;
  double length = 0.0;
  double width = 0.0;

  /// Corners as (i, j), counter-clockwise on screen.
  std::array<PlantPoint, 4> corners() const;
  /// Hard-edged pixel-centre test; half-open in both axes so adjacent
  /// axis-aligned rectangles tile without overlap.
  bool contains(double i, double j) const noexcept;
};

struct FieldTruth {
  PlantConfiguration plants;
  RowColumnAssignment assignment;
  std::vector<LeafShape> leaves;
  LeafMask mask;
};

struct SyntheticField {
  RasterImage image;
  FieldTruth truth;
};

/// Unjittered grid positions with their row/column ids, in generation
/// order. A natural starting point for localisation.
PlantConfiguration nominal_grid(const FieldSpec& spec, RowColumnAssignment* assign = nullptr);

/// Throws ConfigError for an invalid spec and InputError when a plant lands
/// outside the image.
SyntheticField generate_field(const FieldSpec& spec);

/// Renders leaves over brown soil. Leaf colours are drawn per leaf inside
/// the threshold band; the mask marks every covered pixel.
SyntheticField render_leaves(int width, int height, const std::vector<LeafShape>& leaves,
                             const SegmentationThresholds& thresholds, std::uint64_t seed);

/// Rasterises leaves into a mask only.
LeafMask rasterize(int width, int height, const std::vector<LeafShape>& leaves);

/// rows x cols leaves on a regular lattice with `spacing` px pitch,
/// alternating horizontal and vertical. With area_variation = 0 every leaf
/// covers exactly length x width pixels; otherwise each leaf's sides are
/// scaled by sqrt(1 + u), u uniform in [-area_variation, area_variation].
std::vector<LeafShape> leaf_lattice(int rows, int cols, int length, int width, int spacing,
                                    double area_variation, std::uint64_t seed);

/// k disjoint rectangles, one per cell of a square-ish lattice with `cell`
/// px pitch, at pairwise distinct angles spread over [0, pi).
std::vector<LeafShape> rotated_leaves(int k, double length, double width, int cell);

/// CSV `plant_id,i,j,row_id,col_id`.
std::string plants_to_csv(const PlantConfiguration& plants, const RowColumnAssignment& assign);
/// Parses the same format; row_id/col_id are optional (filled with -1).
void plants_from_csv(const std::string& text, PlantConfiguration& plants,
                     RowColumnAssignment& assign);
/// CSV `leaf_id,plant_id,center_i,center_j,angle,length,width,` followed by
/// the four corners `c0_i,c0_j,...,c3_j`.
std::string leaves_to_truth_csv(const std::vector<LeafShape>& leaves);

}  // namespace uavpheno
