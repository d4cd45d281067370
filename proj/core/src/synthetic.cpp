#include "uavpheno/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "json.hpp"

#include "uavpheno/csv.hpp"
#include "uavpheno/error.hpp"
#include "uavpheno/rng.hpp"

namespace uavpheno {

namespace {

constexpr double kPi = std::numbers::pi;

// Exact zeros for axis-aligned angles keep half-open edges exact.
double snap(double v) noexcept {
  if (std::abs(v) < 1e-12) {
    return 0.0;
  }
  if (std::abs(v - 1.0) < 1e-12) {
    return 1.0;
  }
  if (std::abs(v + 1.0) < 1e-12) {
    return -1.0;
  }
  return v;
}

// Soil hue range strictly outside the leaf band.
std::pair<int, int> soil_hue_range(const SegmentationThresholds& th) {
  if (th.tau1 >= 12) {
    return {std::max(0, th.tau1 - 22), th.tau1 - 6};
  }
  if (th.tau2 <= 170) {
    return {th.tau2 + 6, std::min(179, th.tau2 + 18)};
  }
  throw ConfigError("hue band leaves no room for a soil colour");
}

}  // namespace

void FieldSpec::validate() const {
  if (rows < 1 || cols < 1) {
    throw ConfigError("rows and cols must be >= 1");
  }
  if (!(inter_row > 0.0) || !(intra_row > 0.0)) {
    throw ConfigError("row spacings must be positive");
  }
  if (!(jitter_i >= 0.0) || !(jitter_j >= 0.0)) {
    throw ConfigError("jitter must be non-negative");
  }
  if (leaves_per_plant < 0) {
    throw ConfigError("leaves_per_plant must be >= 0");
  }
  if (!(leaf_length > 0.0) || !(leaf_width > 0.0)) {
    throw ConfigError("leaf dimensions must be positive");
  }
  if (!(radial_scale >= 0.0)) {
    throw ConfigError("radial_scale must be non-negative");
  }
  if (width < 1 || height < 1) {
    throw ConfigError("image size must be positive");
  }
  thresholds.validate();
  if (thresholds.tau2 - thresholds.tau1 < 6) {
    throw ConfigError("hue band too narrow to render leaves");
  }
  (void)soil_hue_range(thresholds);
}

FieldSpec parse_field_spec(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("field spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("field spec must be a JSON object");
  }
  FieldSpec s;
  static const std::set<std::string> known{
      "rows",       "cols",        "inter_row",    "intra_row", "jitter_i", "jitter_j",
      "leaves_per_plant", "leaf_length", "leaf_width", "radial_scale", "width", "height",
      "seed",       "thresholds"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown field spec key '" + key + "'");
    }
  }
  try {
    s.rows = j.value("rows", s.rows);
    s.cols = j.value("cols", s.cols);
    s.inter_row = j.value("inter_row", s.inter_row);
    s.intra_row = j.value("intra_row", s.intra_row);
    s.jitter_i = j.value("jitter_i", s.jitter_i);
    s.jitter_j = j.value("jitter_j", s.jitter_j);
    s.leaves_per_plant = j.value("leaves_per_plant", s.leaves_per_plant);
    s.leaf_length = j.value("leaf_length", s.leaf_length);
    s.leaf_width = j.value("leaf_width", s.leaf_width);
    s.radial_scale = j.value("radial_scale", s.radial_scale);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.seed = j.value("seed", s.seed);
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      s.thresholds.tau1 = t.value("tau1", s.thresholds.tau1);
      s.thresholds.tau2 = t.value("tau2", s.thresholds.tau2);
      s.thresholds.tau3 = t.value("tau3", s.thresholds.tau3);
      s.thresholds.tau4 = t.value("tau4", s.thresholds.tau4);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad field spec value: ") + e.what());
  }
  s.validate();
  return s;
}

FieldSpec load_field_spec(const std::string& path) { return parse_field_spec(csv::read_text(path)); }

std::string field_spec_to_json(const FieldSpec& s) {
  nlohmann::ordered_json j;
  j["rows"] = s.rows;
  j["cols"] = s.cols;
  j["inter_row"] = s.inter_row;
  j["intra_row"] = s.intra_row;
  j["jitter_i"] = s.jitter_i;
  j["jitter_j"] = s.jitter_j;
  j["leaves_per_plant"] = s.leaves_per_plant;
  j["leaf_length"] = s.leaf_length;
  j["leaf_width"] = s.leaf_width;
  j["radial_scale"] = s.radial_scale;
  j["width"] = s.width;
  j["height"] = s.height;
  j["seed"] = s.seed;
  j["thresholds"] = {{"tau1", s.thresholds.tau1},
                     {"tau2", s.thresholds.tau2},
                     {"tau3", s.thresholds.tau3},
                     {"tau4", s.thresholds.tau4}};
  return j.dump(2);
}

std::array<PlantPoint, 4> LeafShape::corners() const {
  const double c = snap(std::cos(angle));
  const double s = snap(std::sin(angle));
  std::array<PlantPoint, 4> out;
  const double us[4] = {-0.5, 0.5, 0.5, -0.5};
  const double vs[4] = {-0.5, -0.5, 0.5, 0.5};
  for (int k = 0; k < 4; ++k) {
    const double u = us[k] * length;
    const double v = vs[k] * width;
    const double x = u * c - v * s;
    const double y = u * s + v * c;
    out[static_cast<std::size_t>(k)] = {ci - y, cj + x};
  }
  return out;
}

bool LeafShape::contains(double i, double j) const noexcept {
  const double c = snap(std::cos(angle));
  const double s = snap(std::sin(angle));
  const double dx = j - cj;
  const double dy = ci - i;
  const double u = dx * c + dy * s;
  const double v = -dx * s + dy * c;
  return u >= -0.5 * length && u < 0.5 * length && v >= -0.5 * width && v < 0.5 * width;
}

namespace {

template <typename Fn>
void for_each_covered(int width, int height, const LeafShape& leaf, Fn&& fn) {
  const auto cs = leaf.corners();
  double lo_i = cs[0].i, hi_i = cs[0].i, lo_j = cs[0].j, hi_j = cs[0].j;
  for (const auto& c : cs) {
    lo_i = std::min(lo_i, c.i);
    hi_i = std::max(hi_i, c.i);
    lo_j = std::min(lo_j, c.j);
    hi_j = std::max(hi_j, c.j);
  }
  const int i0 = std::max(0, static_cast<int>(std::floor(lo_i)) - 1);
  const int i1 = std::min(height - 1, static_cast<int>(std::ceil(hi_i)) + 1);
  const int j0 = std::max(0, static_cast<int>(std::floor(lo_j)) - 1);
  const int j1 = std::min(width - 1, static_cast<int>(std::ceil(hi_j)) + 1);
  for (int i = i0; i <= i1; ++i) {
    for (int j = j0; j <= j1; ++j) {
      if (leaf.contains(i, j)) {
        fn(i, j);
      }
    }
  }
}

}  // namespace

LeafMask rasterize(int width, int height, const std::vector<LeafShape>& leaves) {
  LeafMask mask(width, height);
  for (const auto& leaf : leaves) {
    for_each_covered(width, height, leaf, [&](int i, int j) { mask.set(i, j, true); });
  }
  return mask;
}

SyntheticField render_leaves(int width, int height, const std::vector<LeafShape>& leaves,
                             const SegmentationThresholds& th, std::uint64_t seed) {
  th.validate();
  if (th.tau2 - th.tau1 < 6) {
    throw ConfigError("hue band too narrow to render leaves");
  }
  const auto [soil_lo, soil_hi] = soil_hue_range(th);
  Rng rng(seed);
  SyntheticField f;
  f.image = RasterImage(width, height, 3);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      std::uint8_t r, g, b;
      const double h = soil_lo + static_cast<double>(rng.uniform_index(
                                     static_cast<std::uint64_t>(soil_hi - soil_lo + 1)));
      hsv_to_rgb(h, rng.uniform(90.0, 170.0), rng.uniform(70.0, 140.0), r, g, b);
      f.image.at(i, j, 0) = r;
      f.image.at(i, j, 1) = g;
      f.image.at(i, j, 2) = b;
    }
  }
  const double s_lo = std::min(255.0, std::max(th.tau3 + 25.0, 140.0));
  for (const auto& leaf : leaves) {
    std::uint8_t r, g, b;
    const double h = rng.uniform(th.tau1 + 3.0, th.tau2 - 3.0);
    hsv_to_rgb(h, rng.uniform(s_lo, 255.0), rng.uniform(150.0, 240.0), r, g, b);
    for_each_covered(width, height, leaf, [&](int i, int j) {
      f.image.at(i, j, 0) = r;
      f.image.at(i, j, 1) = g;
      f.image.at(i, j, 2) = b;
    });
  }
  f.truth.leaves = leaves;
  f.truth.mask = rasterize(width, height, leaves);
  return f;
}

PlantConfiguration nominal_grid(const FieldSpec& spec, RowColumnAssignment* assign) {
  spec.validate();
  const double i0 = 0.5 * (spec.height - 1 - (spec.rows - 1) * spec.intra_row);
  const double j0 = 0.5 * (spec.width - 1 - (spec.cols - 1) * spec.inter_row);
  PlantConfiguration grid;
  RowColumnAssignment ids;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      grid.push_back({i0 + r * spec.intra_row, j0 + c * spec.inter_row});
      ids.row_of.push_back(r);
      ids.col_of.push_back(c);
    }
  }
  if (assign != nullptr) {
    *assign = std::move(ids);
  }
  return grid;
}

SyntheticField generate_field(const FieldSpec& spec) {
  RowColumnAssignment assign;
  PlantConfiguration plants = nominal_grid(spec, &assign);
  Rng rng(spec.seed);
  for (std::size_t p = 0; p < plants.size(); ++p) {
    plants[p].i += rng.normal(0.0, spec.jitter_i);
    plants[p].j += rng.normal(0.0, spec.jitter_j);
    if (!(plants[p].i >= 0 && plants[p].j >= 0 && plants[p].i <= spec.height - 1 &&
          plants[p].j <= spec.width - 1)) {
      throw InputError("plant " + std::to_string(p) + " falls outside the image");
    }
  }

  std::vector<LeafShape> leaves;
  for (std::size_t p = 0; p < plants.size(); ++p) {
    for (int k = 0; k < spec.leaves_per_plant; ++k) {
      const double radius = rng.exponential(spec.radial_scale);
      const double direction = rng.uniform(0.0, 2.0 * kPi);
      LeafShape leaf;
      leaf.plant = static_cast<int>(p);
      leaf.ci = plants[p].i - radius * std::sin(direction);
      leaf.cj = plants[p].j + radius * std::cos(direction);
      leaf.angle = rng.uniform(0.0, kPi);
      leaf.length = spec.leaf_length;
      leaf.width = spec.leaf_width;
      leaves.push_back(leaf);
    }
  }

  SyntheticField f = render_leaves(spec.width, spec.height, leaves, spec.thresholds,
                                   splitmix64(spec.seed ^ 0x5EED5011ULL));
  f.truth.plants = std::move(plants);
  f.truth.assignment = std::move(assign);
  return f;
}

std::vector<LeafShape> leaf_lattice(int rows, int cols, int length, int width, int spacing,
                                    double area_variation, std::uint64_t seed) {
  if (rows < 1 || cols < 1 || length < 1 || width < 1) {
    throw ConfigError("lattice dimensions must be positive");
  }
  if (!(area_variation >= 0.0 && area_variation < 1.0)) {
    throw ConfigError("area_variation must lie in [0, 1)");
  }
  const double longest = length * std::sqrt(1.0 + area_variation);
  if (spacing < static_cast<int>(std::ceil(longest)) + 2) {
    throw ConfigError("lattice spacing too small for disjoint leaves");
  }
  Rng rng(seed);
  std::vector<LeafShape> leaves;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      LeafShape leaf;
      leaf.ci = spacing / 2 + r * spacing;
      leaf.cj = spacing / 2 + c * spacing;
      leaf.angle = (r + c) % 2 == 0 ? 0.0 : 0.5 * kPi;
      double scale = 1.0;
      if (area_variation > 0.0) {
        scale = std::sqrt(1.0 + rng.uniform(-area_variation, area_variation));
      }
      leaf.length = length * scale;
      leaf.width = width * scale;
      leaves.push_back(leaf);
    }
  }
  return leaves;
}

std::vector<LeafShape> rotated_leaves(int k, double length, double width, int cell) {
  if (k < 1) {
    throw ConfigError("need at least one leaf");
  }
  if (!(length > 0.0 && width > 0.0) || cell < std::hypot(length, width) + 2.0) {
    throw ConfigError("cell too small for disjoint leaves");
  }
  const int per_row = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));
  std::vector<LeafShape> leaves;
  for (int m = 0; m < k; ++m) {
    LeafShape leaf;
    leaf.ci = cell / 2.0 + (m / per_row) * cell;
    leaf.cj = cell / 2.0 + (m % per_row) * cell;
    // Offset keeps angles away from the axes, where rasterisation is
    // kindest.
    leaf.angle = (m + 0.37) * kPi / k;
    leaf.length = length;
    leaf.width = width;
    leaves.push_back(leaf);
  }
  return leaves;
}

std::string plants_to_csv(const PlantConfiguration& plants, const RowColumnAssignment& assign) {
  assign.validate(plants.size());
  std::string out = "plant_id,i,j,row_id,col_id\n";
  for (std::size_t p = 0; p < plants.size(); ++p) {
    out += std::to_string(p) + "," + csv::format(plants[p].i) + "," + csv::format(plants[p].j) +
           "," + std::to_string(assign.row_of[p]) + "," + std::to_string(assign.col_of[p]) + "\n";
  }
  return out;
}

void plants_from_csv(const std::string& text, PlantConfiguration& plants,
                     RowColumnAssignment& assign) {
  const auto table = csv::parse(text);
  csv::require_header(table, {"plant_id", "i", "j"}, "plant CSV");
  const bool has_lines = table.header.size() >= 5 && table.header[3] == "row_id" &&
                         table.header[4] == "col_id";
  std::map<long long, std::size_t> by_id;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const long long id = csv::to_int(table.rows[r].at(0), "plant_id");
    if (!by_id.emplace(id, r).second) {
      throw InputError("duplicate plant_id " + std::to_string(id));
    }
  }
  plants.clear();
  assign = {};
  long long expected = 0;
  for (const auto& [id, r] : by_id) {
    if (id != expected++) {
      throw InputError("plant ids must run 0..P-1");
    }
    const auto& row = table.rows[r];
    if (row.size() < (has_lines ? 5u : 3u)) {
      throw InputError("short row in plant CSV");
    }
    plants.push_back({csv::to_double(row[1], "i"), csv::to_double(row[2], "j")});
    assign.row_of.push_back(has_lines ? static_cast<int>(csv::to_int(row[3], "row_id")) : -1);
    assign.col_of.push_back(has_lines ? static_cast<int>(csv::to_int(row[4], "col_id")) : -1);
  }
  if (plants.empty()) {
    throw InputError("plant CSV lists no plants");
  }
}

std::string leaves_to_truth_csv(const std::vector<LeafShape>& leaves) {
  std::string out =
      "leaf_id,plant_id,center_i,center_j,angle,length,width,"
      "c0_i,c0_j,c1_i,c1_j,c2_i,c2_j,c3_i,c3_j\n";
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    const auto& l = leaves[k];
    out += std::to_string(k) + "," + std::to_string(l.plant) + "," + csv::format(l.ci) + "," +
           csv::format(l.cj) + "," + csv::format(l.angle) + "," + csv::format(l.length) + "," +
           csv::format(l.width);
    for (const auto& c : l.corners()) {
      out += "," + csv::format(c.i) + "," + csv::format(c.j);
    }
    out += "\n";
  }
  return out;
}

}  // namespace uavpheno
