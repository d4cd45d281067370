#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "uavpheno/raster.hpp"
#include "uavpheno/segmentation.hpp"

namespace uavpheno {

/// Per-pixel gradient of the smoothed leaf mask. Angles are measured from
/// the +x (column) axis towards +y, where +y points up the image, and lie in
/// [0, 2pi). The gradient points from background into the leaf.
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> angle;
  std::vector<double> magnitude;
  std::vector<std::uint8_t> valid;

  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(j);
  }
  bool is_valid(int i, int j) const noexcept { return valid[index(i, j)] != 0; }
  double angle_at(int i, int j) const noexcept { return angle[index(i, j)]; }
};

/// Leaf-slice thresholds: opposite-edge tolerance, slice merging and
/// discontinuity bridging, all in radians.
struct AngleThresholds {
  double ta = std::numbers::pi / 5.0;
  double tb = std::numbers::pi / 8.0;
  double tc = std::numbers::pi / 6.0;

  void validate() const;
};

/// Pixel-wide line joining two opposite leaf edges.
struct LeafSlice {
  PixelCoord a;
  PixelCoord b;
  double ga = 0.0;  // gradient angle at a
  double gb = 0.0;  // gradient angle at b
  double theta = 0.0;  // slice normal, [0, pi)
  std::vector<PixelCoord> pixels;  // 8-connected line a..b
  std::vector<PixelCoord> owned;   // pixels this slice won under the stroke-width rule

  double span() const noexcept;  // |a - b|, pixels
  /// Pixel midpoint of a..b as (row, col).
  std::pair<double, double> midpoint() const noexcept;
};

/// Chain of slices belonging to one leaf, ordered along the leaf's running
/// direction, plus the pixels owned by those slices (sorted row-major,
/// disjoint across segments).
struct LeafSegment {
  std::vector<LeafSlice> slices;
  std::vector<PixelCoord> pixels;
};

struct GradientOptions {
  int smooth_radius = 2;
  double magnitude_floor = 0.05;
};

/// Box-smooths the mask (zero outside the image) and takes central
/// differences. Pixels with magnitude <= magnitude_floor are invalid.
GradientField gradient_angles(const LeafMask& mask, GradientOptions opts = {});

/// |ga - gb + pi| wrapped to [0, 2pi) and folded to [0, pi], compared < ta.
bool opposite_edge_test(double ga, double gb, double ta) noexcept;

/// ((ga + gb) / 2) mod pi.
double slice_angle(double ga, double gb) noexcept;

/// min(d, pi - d) for d = |t1 - t2| mod pi.
double folded_angle_distance(double t1, double t2) noexcept;

/// Stroke-width slice extraction. From every valid edge pixel a ray is cast
/// along the gradient, i.e. into the leaf interior; the last leaf pixel
/// before the ray leaves the mask is the opposite edge. Slices longer than
/// max_width or failing opposite_edge_test are dropped, A<->B duplicates are
/// removed, and every covered pixel is owned by its shortest covering slice.
/// Only slices that own at least one pixel are returned, in a deterministic
/// order.
std::vector<LeafSlice> extract_slices(const LeafMask& mask, const GradientField& grad, double ta,
                                      int max_width);

/// Joins slices whose pixel sets touch (8-connectivity) and whose angles are
/// within tb (folded). Adjacency uses `owned` pixels, or `pixels` when a
/// slice owns nothing.
std::vector<LeafSegment> merge_adjacent_slices(const std::vector<LeafSlice>& slices, double tb);

/// Reconnects segments split by a discontinuity. From each pixel of a
/// terminal slice, marches up to max_gap pixels outward along that slice's
/// theta; hitting a terminal slice of another segment whose angle is within
/// tc merges the two. Pixels of incompatible slices are passed over.
std::vector<LeafSegment> bridge_discontinuities(const std::vector<LeafSegment>& segments,
                                                const GradientField& grad, double tc,
                                                int max_gap);

struct LeafMetrics {
  double length = 0.0;  // m
  double width = 0.0;   // m
  double area = 0.0;    // m^2
};

/// Length: arc length of the slice-midpoint chain (midpoints averaged in
/// 4-pixel bins along the running direction), extended to the outermost leaf
/// pixels plus half a pixel. Width: mean slice extent |a - b| + 1. Area:
/// pixel count. All scaled by gsd. Throws InputError for an empty segment.
LeafMetrics leaf_metrics(const LeafSegment& segment, double gsd);

struct MorphologyConfig {
  AngleThresholds angles;
  GradientOptions gradient;
  int max_width = 60;
  int max_gap = 30;
  /// Segments with fewer slices are discarded as fragments (crossing
  /// junctions, leaf tips).
  int min_slices = 4;

  void validate() const;
};

struct MorphologyResult {
  GradientField gradient;
  std::vector<LeafSlice> slices;
  std::vector<LeafSegment> leaves;
};

/// gradient -> slices -> merge -> bridge -> fragment filter.
MorphologyResult segment_individual_leaves(const LeafMask& mask, const MorphologyConfig& config);

/// CSV `leaf_id,length_m,width_m,area_m2,n_slices`.
std::string leaves_to_csv(const std::vector<LeafSegment>& leaves, double gsd);

/// Mask in dark gray with each leaf's pixels in its own color.
RasterImage leaf_overlay(const LeafMask& mask, const std::vector<LeafSegment>& leaves);

}  // namespace uavpheno
