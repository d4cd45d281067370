#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "context.hpp"
#include "json.hpp"
#include "uavpheno/csv.hpp"
#include "uavpheno/dem.hpp"
#include "uavpheno/error.hpp"
#include "uavpheno/geometry_io.hpp"
#include "uavpheno/lens.hpp"
#include "uavpheno/localization.hpp"
#include "uavpheno/morphology.hpp"
#include "uavpheno/orientation.hpp"
#include "uavpheno/ortho.hpp"
#include "uavpheno/png_io.hpp"
#include "uavpheno/raster.hpp"
#include "uavpheno/scoring.hpp"
#include "uavpheno/segmentation.hpp"
#include "uavpheno/synthetic.hpp"

namespace uavpheno::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

template <typename T>
struct Flag {
  T value{};
  CLI::Option* opt = nullptr;
};

template <typename T>
void add(CLI::App* app, const std::string& name, Flag<T>& flag, const std::string& help) {
  flag.opt = app->add_option(name, flag.value, help);
}

template <typename T>
T get(RunContext& ctx, const std::string& key, const Flag<T>& flag, const T& fallback) {
  return ctx.param(key, flag.opt, flag.value, fallback);
}

fs::path get_input(RunContext& ctx, const std::string& key, const Flag<std::string>& flag) {
  return ctx.input(key, flag.opt, flag.value);
}

std::optional<fs::path> get_optional_input(RunContext& ctx, const std::string& key,
                                           const Flag<std::string>& flag) {
  return ctx.optional_input(key, flag.opt, flag.value);
}

void write_json(const fs::path& path, const ojson& j) { csv::write_text(path, j.dump(2) + "\n"); }

ojson parse_ordered(const std::string& text) { return ojson::parse(text); }

LeafMask load_mask(const fs::path& path) { return LeafMask::from_image(load_image(path)); }

// ---------------------------------------------------------------------------
// Option sets

struct CommonFlags {
  Flag<std::string> out;
};

struct UndistortFlags : CommonFlags {
  Flag<std::string> image, camera;
};

struct RopFlags : CommonFlags {
  Flag<std::string> matches;
  Flag<double> threshold;
  Flag<int> iterations;
  Flag<std::uint64_t> seed;
};

struct AbsorientFlags : CommonFlags {
  Flag<std::string> gcps, eops, cloud;
};

struct DemFlags : CommonFlags {
  Flag<std::string> cloud;
  Flag<double> origin_x, origin_y, cell, power;
  Flag<int> nx, ny, neighbours;
};

struct OrthoFlags : CommonFlags {
  Flag<std::string> camera, eops, dem;
  Flag<double> gsd;
};

struct ThresholdFlags {
  Flag<int> tau1, tau2, tau3, tau4;
};

struct SegmentFlags : CommonFlags, ThresholdFlags {
  Flag<std::string> image;
};

struct CountFlags : CommonFlags {
  Flag<std::string> mask;
  Flag<double> rho;
  Flag<std::int64_t> calib_leaves;
};

struct HeatmapFlags : CommonFlags {
  Flag<std::string> mask;
  Flag<int> window;
};

struct LeavesFlags : CommonFlags {
  Flag<std::string> mask;
  Flag<double> gsd, ta, tb, tc, magnitude_floor;
  Flag<int> max_width, max_gap, min_slices, smooth_radius;
};

struct LocateFlags : CommonFlags {
  Flag<std::string> mask, init, truth, mode;
  Flag<int> window, sweeps;
  Flag<double> epsilon, sigma_floor, line_gap;
  Flag<bool> costmaps;
};

struct SynthFlags : CommonFlags {
  Flag<std::string> spec;
  Flag<std::uint64_t> seed;
};

struct ScoreFlags : CommonFlags {
  Flag<std::string> estimate, truth;
};

void add_thresholds(CLI::App* app, ThresholdFlags& f) {
  add(app, "--tau1", f.tau1, "Lower hue bound [0,180) (default 30)");
  add(app, "--tau2", f.tau2, "Upper hue bound [0,180) (default 79)");
  add(app, "--tau3", f.tau3, "Saturation threshold [0,255] (default 30)");
  add(app, "--tau4", f.tau4, "Value threshold [0,255] (default 163)");
}

SegmentationThresholds get_thresholds(RunContext& ctx, const ThresholdFlags& f) {
  const SegmentationThresholds d;
  SegmentationThresholds th;
  th.tau1 = get(ctx, "tau1", f.tau1, d.tau1);
  th.tau2 = get(ctx, "tau2", f.tau2, d.tau2);
  th.tau3 = get(ctx, "tau3", f.tau3, d.tau3);
  th.tau4 = get(ctx, "tau4", f.tau4, d.tau4);
  th.validate();
  return th;
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_undistort(RunContext& ctx, const UndistortFlags& f) {
  const fs::path image_path = get_input(ctx, "image", f.image);
  const fs::path camera_path = get_input(ctx, "camera", f.camera);
  const SmacCamera cam = load_camera_json(camera_path);
  const RasterImage img = load_image(image_path);
  const RasterImage out =
      ctx.timed("undistort", [&] { return undistort_image(img, cam, ctx.threads()); });
  save_image(out, ctx.output(image_path.stem().string() + "_undistorted.png"));
}

void cmd_rop(RunContext& ctx, const RopFlags& f) {
  const fs::path matches_path = get_input(ctx, "matches", f.matches);
  RansacOptions opts;
  opts.threshold = get(ctx, "threshold", f.threshold, opts.threshold);
  opts.iterations = get(ctx, "iterations", f.iterations, opts.iterations);
  opts.seed = get(ctx, "seed", f.seed, opts.seed);
  ctx.set_seed(opts.seed);
  const auto matches = read_correspondences(matches_path);
  const RansacResult result = ctx.timed("ransac", [&] { return ransac_rop(matches, opts); });

  ojson j;
  j["model"] = parse_ordered(similarity2d_to_json(result.model));
  j["matches"] = matches.size();
  j["inliers"] = result.inliers.size();
  write_json(ctx.output("rop.json"), j);

  std::ostringstream csv_out;
  csv_out << "index,x1,y1,x2,y2\n";
  for (std::size_t k : result.inliers) {
    const auto& m = matches[k];
    csv_out << k << ',' << csv::format(m.a.x) << ',' << csv::format(m.a.y) << ','
            << csv::format(m.b.x) << ',' << csv::format(m.b.y) << '\n';
  }
  csv::write_text(ctx.output("rop_inliers.csv"), csv_out.str());
}

void cmd_absorient(RunContext& ctx, const AbsorientFlags& f) {
  const auto gcps = read_gcps(get_input(ctx, "gcps", f.gcps));
  const auto eops_path = get_optional_input(ctx, "eops", f.eops);
  const auto cloud_path = get_optional_input(ctx, "cloud", f.cloud);

  std::vector<Eigen::Vector3d> local, mapping;
  for (const auto& g : gcps) {
    local.push_back(g.local);
    mapping.push_back(g.mapping);
  }
  const Similarity3D t =
      ctx.timed("absolute_orientation", [&] { return absolute_orientation(local, mapping); });

  ojson j = parse_ordered(similarity3d_to_json(t));
  j["gcps"] = gcps.size();
  j["rms_residual"] = rms_residual(t, local, mapping);
  write_json(ctx.output("absorient.json"), j);

  if (eops_path) {
    auto eops = read_eops(*eops_path);
    for (auto& e : eops) {
      e.eo = transform_exterior(e.eo, t);
    }
    csv::write_text(ctx.output("eop_mapped.json"), format_eops(eops));
  }
  if (cloud_path) {
    auto cloud = read_point_cloud(*cloud_path);
    for (auto& p : cloud) {
      p = t.apply(p);
    }
    csv::write_text(ctx.output("cloud_mapped.csv"), format_point_cloud(cloud));
  }
}

void cmd_dem(RunContext& ctx, const DemFlags& f) {
  const auto cloud = read_point_cloud(get_input(ctx, "cloud", f.cloud));
  if (cloud.empty()) {
    throw InputError("point cloud is empty");
  }
  const double cell = get(ctx, "cell", f.cell, 1.0);
  if (!(cell > 0.0) || !std::isfinite(cell)) {
    throw ConfigError("cell must be positive");
  }
  // Default extent: the cloud's bounding box snapped outward to the cell.
  double min_x = cloud[0].x(), max_x = min_x, min_y = cloud[0].y(), max_y = min_y;
  for (const auto& p : cloud) {
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }
  const double ox = get(ctx, "origin_x", f.origin_x, std::floor(min_x / cell) * cell);
  const double oy = get(ctx, "origin_y", f.origin_y, std::floor(min_y / cell) * cell);
  const int nx = get(ctx, "nx", f.nx, std::max(1, static_cast<int>(std::ceil((max_x - ox) / cell))));
  const int ny = get(ctx, "ny", f.ny, std::max(1, static_cast<int>(std::ceil((max_y - oy) / cell))));
  IdwOptions opts;
  opts.neighbours = get(ctx, "neighbours", f.neighbours, opts.neighbours);
  opts.power = get(ctx, "power", f.power, opts.power);
  const DemGrid dem =
      ctx.timed("idw", [&] { return interpolate_dem(cloud, ox, oy, cell, nx, ny, opts); });
  csv::write_text(ctx.output("dem.csv"), format_dem_csv(dem));
}

void cmd_ortho(RunContext& ctx, const OrthoFlags& f) {
  const SmacCamera cam = load_camera_json(get_input(ctx, "camera", f.camera));
  const fs::path eops_path = get_input(ctx, "eops", f.eops);
  const DemGrid dem = read_dem_csv(get_input(ctx, "dem", f.dem));
  const double gsd = get(ctx, "gsd", f.gsd, dem.cell);
  if (!(gsd > 0.0) || !std::isfinite(gsd)) {
    throw ConfigError("gsd must be positive");
  }
  std::vector<OrthoSource> sources;
  for (const auto& rec : read_eops(eops_path)) {
    const fs::path image_path = eops_path.parent_path() / rec.image;
    if (!fs::exists(image_path)) {
      throw InputError("image '" + image_path.string() + "' listed in EOP file does not exist");
    }
    sources.push_back({load_image(image_path), rec.eo});
  }
  const OrthoMosaic mosaic =
      ctx.timed("orthorectify", [&] { return orthorectify(sources, cam, dem, gsd, ctx.threads()); });
  save_image(mosaic.image, ctx.output("ortho.png"));
  ojson j;
  j["origin_x"] = mosaic.origin_x;
  j["top_y"] = mosaic.top_y;
  j["gsd"] = mosaic.gsd;
  j["width"] = mosaic.image.width();
  j["height"] = mosaic.image.height();
  j["images"] = sources.size();
  write_json(ctx.output("ortho.json"), j);
}

void cmd_segment(RunContext& ctx, const SegmentFlags& f) {
  const RasterImage rgb = load_image(get_input(ctx, "image", f.image));
  const SegmentationThresholds th = get_thresholds(ctx, f);
  const LeafMask mask = ctx.timed("segment", [&] { return segment_leaves(rgb, th); });
  save_image(mask.to_image(), ctx.output("mask.png"));
}

void cmd_count(RunContext& ctx, const CountFlags& f) {
  const LeafMask mask = load_mask(get_input(ctx, "mask", f.mask));
  const auto rho_flag = ctx.optional_param("rho", f.rho.opt, f.rho.value);
  LeafCountCalibration cal;
  ojson calibration;
  if (rho_flag) {
    if (!(*rho_flag > 0.0) || !std::isfinite(*rho_flag)) {
      throw ConfigError("rho must be positive");
    }
    cal.rho = *rho_flag;
    calibration["source"] = "rho";
  } else {
    const nlohmann::json* region = ctx.config_value("calib_region");
    const auto leaves = ctx.optional_param("calib_leaves", f.calib_leaves.opt, f.calib_leaves.value);
    if (region == nullptr || !leaves) {
      throw ConfigError("count needs rho, or calib_region [i0, j0, height, width] with calib_leaves");
    }
    std::vector<int> r;
    try {
      r = region->get<std::vector<int>>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("calib_region must be [i0, j0, height, width]");
    }
    if (r.size() != 4 || r[2] <= 0 || r[3] <= 0) {
      throw ConfigError("calib_region must be [i0, j0, height, width] with positive size");
    }
    const std::int64_t alpha0 = count_pixels(mask.crop(r[0], r[1], r[2], r[3]));
    cal = calibrate_rho(alpha0, *leaves);
    calibration["source"] = "region";
    calibration["alpha0"] = alpha0;
    calibration["lambda0"] = *leaves;
  }
  const std::int64_t alpha = count_pixels(mask);
  const LeafCountEstimate est = estimate_leaf_count(alpha, cal);

  ojson j;
  j["alpha"] = alpha;
  j["rho"] = cal.rho;
  j["calibration"] = calibration;
  j["leaf_count"] = est.value;
  j["leaf_count_rounded"] = est.rounded;
  write_json(ctx.output("count.json"), j);
  csv::write_text(ctx.output("count.csv"),
                  "alpha,rho,leaf_count,leaf_count_rounded\n" + std::to_string(alpha) + ',' +
                      csv::format(cal.rho) + ',' + csv::format(est.value) + ',' +
                      std::to_string(est.rounded) + '\n');
}

void cmd_heatmap(RunContext& ctx, const HeatmapFlags& f) {
  const LeafMask mask = load_mask(get_input(ctx, "mask", f.mask));
  const int window = get(ctx, "window", f.window, 41);
  const DensityMap map = ctx.timed("heatmap", [&] { return density_heatmap(mask, window); });
  save_png16(density_to_gray16(map), ctx.output("heatmap.png"));
  csv::write_text(ctx.output("heatmap.csv"), density_to_csv(map));
  save_image(density_preview(map), ctx.output("heatmap_preview.png"));
}

void cmd_leaves(RunContext& ctx, const LeavesFlags& f) {
  const LeafMask mask = load_mask(get_input(ctx, "mask", f.mask));
  MorphologyConfig cfg;
  const double gsd = get(ctx, "gsd", f.gsd, 1.0);
  if (!(gsd > 0.0) || !std::isfinite(gsd)) {
    throw ConfigError("gsd must be positive");
  }
  cfg.angles.ta = get(ctx, "ta", f.ta, cfg.angles.ta);
  cfg.angles.tb = get(ctx, "tb", f.tb, cfg.angles.tb);
  cfg.angles.tc = get(ctx, "tc", f.tc, cfg.angles.tc);
  cfg.max_width = get(ctx, "max_width", f.max_width, cfg.max_width);
  cfg.max_gap = get(ctx, "max_gap", f.max_gap, cfg.max_gap);
  cfg.min_slices = get(ctx, "min_slices", f.min_slices, cfg.min_slices);
  cfg.gradient.smooth_radius = get(ctx, "smooth_radius", f.smooth_radius, cfg.gradient.smooth_radius);
  cfg.gradient.magnitude_floor =
      get(ctx, "magnitude_floor", f.magnitude_floor, cfg.gradient.magnitude_floor);
  cfg.validate();
  const MorphologyResult result =
      ctx.timed("morphology", [&] { return segment_individual_leaves(mask, cfg); });
  csv::write_text(ctx.output("leaves.csv"), leaves_to_csv(result.leaves, gsd));
  save_image(leaf_overlay(mask, result.leaves), ctx.output("leaves_overlay.png"));
}

void draw_dot(RasterImage& img, double i, double j, std::uint8_t r, std::uint8_t g,
              std::uint8_t b) {
  const int ci = static_cast<int>(std::lround(i));
  const int cj = static_cast<int>(std::lround(j));
  for (int di = -2; di <= 2; ++di) {
    for (int dj = -2; dj <= 2; ++dj) {
      if (di * di + dj * dj > 5 || !img.contains(ci + di, cj + dj)) {
        continue;
      }
      img.at(ci + di, cj + dj, 0) = r;
      img.at(ci + di, cj + dj, 1) = g;
      img.at(ci + di, cj + dj, 2) = b;
    }
  }
}

RasterImage costmap_image(const CostMap& map) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double c : map.cost) {
    if (std::isfinite(c)) {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
  }
  RasterImage img(map.size, map.size, 1);
  for (int di = 0; di < map.size; ++di) {
    for (int dj = 0; dj < map.size; ++dj) {
      const double c = map.at(di, dj);
      // Low cost is bright; infeasible candidates are black.
      double v = 0.0;
      if (std::isfinite(c)) {
        v = hi > lo ? 255.0 * (hi - c) / (hi - lo) : 255.0;
      }
      img.at(di, dj) = static_cast<std::uint8_t>(std::lround(v));
    }
  }
  return img;
}

std::vector<Region> parse_regions(const nlohmann::json* j) {
  std::vector<Region> regions;
  if (j == nullptr) {
    return regions;
  }
  if (!j->is_array()) {
    throw ConfigError("regions must be an array of [i0, j0, height, width]");
  }
  for (const auto& r : *j) {
    std::vector<int> v;
    try {
      v = r.get<std::vector<int>>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("regions must be an array of [i0, j0, height, width]");
    }
    if (v.size() != 4 || v[2] <= 0 || v[3] <= 0) {
      throw ConfigError("each region needs [i0, j0, height, width] with positive size");
    }
    regions.push_back({v[0], v[1], v[2], v[3]});
  }
  return regions;
}

void cmd_locate(RunContext& ctx, const LocateFlags& f) {
  const LeafMask mask = load_mask(get_input(ctx, "mask", f.mask));
  const fs::path init_path = get_input(ctx, "init", f.init);
  const auto truth_path = get_optional_input(ctx, "truth", f.truth);

  IcdConfig cfg;
  cfg.mode = parse_localization_mode(get(ctx, "mode", f.mode, to_string(cfg.mode)));
  cfg.window = get(ctx, "window", f.window, cfg.window);
  cfg.sweeps = get(ctx, "sweeps", f.sweeps, cfg.sweeps);
  cfg.epsilon = get(ctx, "epsilon", f.epsilon, cfg.epsilon);
  cfg.sigma_floor = get(ctx, "sigma_floor", f.sigma_floor, cfg.sigma_floor);
  cfg.threads = ctx.threads();
  const double line_gap = get(ctx, "line_gap", f.line_gap, 20.0);
  const bool costmaps = get(ctx, "costmaps", f.costmaps, false);
  const std::vector<Region> regions = parse_regions(ctx.config_value("regions"));
  cfg.validate();

  PlantConfiguration x0;
  RowColumnAssignment assign;
  plants_from_csv(csv::read_text(init_path), x0, assign);
  // Missing line ids are derived by clustering the initial coordinates.
  const bool missing_rows = std::any_of(assign.row_of.begin(), assign.row_of.end(),
                                        [](int r) { return r < 0; });
  const bool missing_cols = std::any_of(assign.col_of.begin(), assign.col_of.end(),
                                        [](int c) { return c < 0; });
  if (missing_rows || missing_cols) {
    std::vector<double> is, js;
    for (const auto& p : x0) {
      is.push_back(p.i);
      js.push_back(p.j);
    }
    if (missing_rows) {
      assign.row_of = cluster_lines(is, line_gap);
    }
    if (missing_cols) {
      assign.col_of = cluster_lines(js, line_gap);
    }
  }

  std::vector<IcdResult> per_region;
  const PlantConfiguration plants = ctx.timed(
      "icd", [&] { return locate_plants(mask, x0, assign, cfg, regions, &per_region); });

  std::ostringstream pcsv;
  pcsv << "plant_id,i,j\n";
  for (std::size_t p = 0; p < plants.size(); ++p) {
    pcsv << p << ',' << csv::format(plants[p].i) << ',' << csv::format(plants[p].j) << '\n';
  }
  csv::write_text(ctx.output("plants.csv"), pcsv.str());

  std::ostringstream tcsv;
  tcsv << "region,sweep,step,cost\n";
  for (std::size_t r = 0; r < per_region.size(); ++r) {
    const IcdResult& res = per_region[r];
    for (std::size_t s = 0; s < res.sweep_start.size(); ++s) {
      const std::size_t end = s + 1 < res.sweep_start.size() ? res.sweep_start[s + 1] : res.trace.size();
      for (std::size_t k = res.sweep_start[s]; k < end; ++k) {
        tcsv << r << ',' << s << ',' << (k - res.sweep_start[s]) << ','
             << csv::format(res.trace[k]) << '\n';
      }
    }
  }
  csv::write_text(ctx.output("locate_trace.csv"), tcsv.str());

  RasterImage overlay(mask.width(), mask.height(), 3);
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      const std::uint8_t v = mask.at(i, j) ? 110 : 0;
      for (int c = 0; c < 3; ++c) {
        overlay.at(i, j, c) = v;
      }
    }
  }
  if (truth_path) {
    PlantConfiguration truth;
    RowColumnAssignment unused;
    plants_from_csv(csv::read_text(*truth_path), truth, unused);
    for (const auto& p : truth) {
      draw_dot(overlay, p.i, p.j, 0, 255, 0);
    }
  }
  for (const auto& p : plants) {
    draw_dot(overlay, p.i, p.j, 255, 0, 0);
  }
  save_image(overlay, ctx.output("locate_overlay.png"));

  if (costmaps) {
    // Evaluated on the whole mask at the final configuration.
    const auto zset = build_pixel_set(mask);
    const double sigma = estimate_sigma(zset, plants, cfg.sigma_floor);
    ctx.timed("costmaps", [&] {
      for (std::size_t p = 0; p < plants.size(); ++p) {
        const PriorEntry prior = prior_params(plants, assign, p, cfg.sigma_floor);
        const CostMap map = cost_map(p, zset, plants, sigma, prior, cfg.mode, cfg.window,
                                     mask.width(), mask.height(), ctx.threads());
        save_image(costmap_image(map), ctx.output("costmap_" + std::to_string(p) + ".png"));
      }
    });
  }
}

void cmd_synth(RunContext& ctx, const SynthFlags& f) {
  FieldSpec spec;
  if (const auto path = get_optional_input(ctx, "spec", f.spec)) {
    spec = load_field_spec(*path);
  } else if (const nlohmann::json* inline_spec = ctx.config_value("field")) {
    spec = parse_field_spec(inline_spec->dump());
  }
  spec.seed = get(ctx, "seed", f.seed, spec.seed);
  spec.validate();
  ctx.set_seed(spec.seed);
  const std::string spec_json = field_spec_to_json(spec);
  ctx.record("field_spec", parse_ordered(spec_json));

  const SyntheticField field = ctx.timed("generate", [&] { return generate_field(spec); });
  RowColumnAssignment init_assign;
  const PlantConfiguration init = nominal_grid(spec, &init_assign);

  save_image(field.image, ctx.output("image.png"));
  save_image(field.truth.mask.to_image(), ctx.output("mask.png"));
  csv::write_text(ctx.output("plants.csv"), plants_to_csv(field.truth.plants, field.truth.assignment));
  csv::write_text(ctx.output("leaves.csv"), leaves_to_truth_csv(field.truth.leaves));
  csv::write_text(ctx.output("init.csv"), plants_to_csv(init, init_assign));
  csv::write_text(ctx.output("spec.json"), spec_json);
}

void cmd_score(RunContext& ctx, const ScoreFlags& f) {
  PlantConfiguration est, truth;
  RowColumnAssignment unused;
  plants_from_csv(csv::read_text(get_input(ctx, "estimate", f.estimate)), est, unused);
  plants_from_csv(csv::read_text(get_input(ctx, "truth", f.truth)), truth, unused);
  const LocalizationScore score = score_localization(est, truth);

  std::ostringstream pairs;
  pairs << "estimate_id,truth_id,error_px\n";
  for (const auto& [e, t] : score.pairs) {
    pairs << e << ',' << t << ','
          << csv::format(std::hypot(est[e].i - truth[t].i, est[e].j - truth[t].j)) << '\n';
  }
  csv::write_text(ctx.output("score.csv"), pairs.str());
  csv::write_text(ctx.output("score_summary.csv"),
                  "plants,mean_error_px,max_error_px\n" + std::to_string(est.size()) + ',' +
                      csv::format(score.mean_error) + ',' + csv::format(score.max_error) + '\n');
  ojson j;
  j["plants"] = est.size();
  j["mean_error_px"] = score.mean_error;
  j["max_error_px"] = score.max_error;
  write_json(ctx.output("score.json"), j);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Desk-scale UAV plant phenotyping pipeline.\n"
               "Parameters resolve as: flag, then the subcommand's section of the config "
               "file, then a top-level config key, then the built-in default. Paths in the "
               "config are relative to the config file.",
               "uavpheno"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  Flag<int> threads;
  app.add_option("-c,--config", config_path, "JSON config file")->envname(kConfigEnv);
  threads.opt = app.add_option("--threads", threads.value,
                               "Worker threads for data-parallel stages (default 1)")
                    ->check(CLI::Range(1, 1024));

  auto add_out = [](CLI::App* sub, CommonFlags& f) {
    add(sub, "-o,--out", f.out, "Output directory (config output_dir, default ./out)");
  };

  UndistortFlags undistort;
  auto* s_undistort = app.add_subcommand(
      "undistort", "Resample an image through the SMAC lens model. Writes <stem>_undistorted.png.");
  add(s_undistort, "--image", undistort.image, "Input PNG (8-bit gray or RGB)");
  add(s_undistort, "--camera", undistort.camera,
      "Camera JSON: xp, yp, k0..k3, p1, p2, r0, focal, pixel_pitch, sensor_width, sensor_height");
  add_out(s_undistort, undistort);

  RopFlags rop;
  auto* s_rop = app.add_subcommand(
      "rop", "RANSAC 2-D similarity between two images. Writes rop.json and rop_inliers.csv.");
  add(s_rop, "--matches", rop.matches, "Correspondence CSV with header x1,y1,x2,y2");
  add(s_rop, "--threshold", rop.threshold, "Inlier distance in pixels (default 1)");
  add(s_rop, "--iterations", rop.iterations, "RANSAC iterations (default 500)");
  add(s_rop, "--seed", rop.seed, "RNG seed (default 0)");
  add_out(s_rop, rop);

  AbsorientFlags absorient;
  auto* s_abs = app.add_subcommand(
      "absorient",
      "7-parameter similarity from GCPs. Writes absorient.json, plus eop_mapped.json and "
      "cloud_mapped.csv when EOPs or a cloud are given.");
  add(s_abs, "--gcps", absorient.gcps, "GCP CSV with header Xlocal,Ylocal,Zlocal,Xmap,Ymap,Zmap");
  add(s_abs, "--eops", absorient.eops, "EOP JSON array to map into the GCP frame");
  add(s_abs, "--cloud", absorient.cloud, "Point cloud CSV with header X,Y,Z to map");
  add_out(s_abs, absorient);

  DemFlags dem;
  auto* s_dem = app.add_subcommand("dem", "IDW elevation grid from a point cloud. Writes dem.csv.");
  add(s_dem, "--cloud", dem.cloud, "Point cloud CSV with header X,Y,Z");
  add(s_dem, "--cell", dem.cell, "Cell size in map units (default 1)");
  add(s_dem, "--origin-x", dem.origin_x, "Grid min X (default: cloud extent)");
  add(s_dem, "--origin-y", dem.origin_y, "Grid min Y (default: cloud extent)");
  add(s_dem, "--nx", dem.nx, "Columns (default: cloud extent)");
  add(s_dem, "--ny", dem.ny, "Rows (default: cloud extent)");
  add(s_dem, "--neighbours", dem.neighbours, "Nearest points per cell (default 8)");
  add(s_dem, "--power", dem.power, "IDW power (default 2)");
  add_out(s_dem, dem);

  OrthoFlags ortho;
  auto* s_ortho = app.add_subcommand(
      "ortho", "Backward-projection orthophoto. Writes ortho.png and ortho.json (georeference).");
  add(s_ortho, "--camera", ortho.camera, "Camera JSON");
  add(s_ortho, "--eops", ortho.eops, "EOP JSON array; image paths are relative to this file");
  add(s_ortho, "--dem", ortho.dem, "DEM CSV");
  add(s_ortho, "--gsd", ortho.gsd, "Output ground sampling distance (default: DEM cell)");
  add_out(s_ortho, ortho);

  SegmentFlags segment;
  auto* s_segment = app.add_subcommand(
      "segment", "HSV threshold leaf segmentation. Writes mask.png (0/255).");
  add(s_segment, "--image", segment.image, "RGB PNG");
  add_thresholds(s_segment, segment);
  add_out(s_segment, segment);

  CountFlags count;
  auto* s_count = app.add_subcommand(
      "count",
      "Leaf count from mask pixels. Needs rho, or calib_region [i0,j0,h,w] (config) with "
      "calib_leaves. Writes count.json and count.csv.");
  add(s_count, "--mask", count.mask, "Mask PNG");
  add(s_count, "--rho", count.rho, "Pixels per leaf");
  add(s_count, "--calib-leaves", count.calib_leaves, "Leaves inside calib_region");
  add_out(s_count, count);

  HeatmapFlags heatmap;
  auto* s_heatmap = app.add_subcommand(
      "heatmap",
      "Sliding-window leaf density. Writes heatmap.png (16-bit), heatmap.csv and "
      "heatmap_preview.png.");
  add(s_heatmap, "--mask", heatmap.mask, "Mask PNG");
  add(s_heatmap, "--window", heatmap.window, "Odd window size (default 41)");
  add_out(s_heatmap, heatmap);

  LeavesFlags leaves;
  auto* s_leaves = app.add_subcommand(
      "leaves",
      "Individual leaf segmentation and metrics. Writes leaves.csv "
      "(leaf_id,length_m,width_m,area_m2,n_slices) and leaves_overlay.png.");
  add(s_leaves, "--mask", leaves.mask, "Mask PNG");
  add(s_leaves, "--gsd", leaves.gsd, "Metres per pixel (default 1)");
  add(s_leaves, "--ta", leaves.ta, "Opposite-edge tolerance, radians (default pi/5)");
  add(s_leaves, "--tb", leaves.tb, "Slice merge tolerance, radians (default pi/8)");
  add(s_leaves, "--tc", leaves.tc, "Bridging tolerance, radians (default pi/6)");
  add(s_leaves, "--max-width", leaves.max_width, "Longest slice in pixels (default 60)");
  add(s_leaves, "--max-gap", leaves.max_gap, "Longest bridged gap in pixels (default 30)");
  add(s_leaves, "--min-slices", leaves.min_slices, "Fewest slices per leaf (default 4)");
  add(s_leaves, "--smooth-radius", leaves.smooth_radius, "Mask smoothing radius (default 2)");
  add(s_leaves, "--magnitude-floor", leaves.magnitude_floor, "Gradient floor (default 0.05)");
  add_out(s_leaves, leaves);

  LocateFlags locate;
  auto* s_locate = app.add_subcommand(
      "locate",
      "MAP plant localisation by coordinate descent. Writes plants.csv (plant_id,i,j), "
      "locate_overlay.png, locate_trace.csv and, on request, costmap_<p>.png. Tiling comes from "
      "config regions [[i0,j0,h,w],...].");
  add(s_locate, "--mask", locate.mask, "Mask PNG");
  add(s_locate, "--init", locate.init, "Initial plants CSV plant_id,i,j[,row_id,col_id]");
  add(s_locate, "--truth", locate.truth, "Truth plants CSV, drawn green in the overlay");
  add(s_locate, "--mode", locate.mode, "full, no_prior or no_intra_row (default full)");
  add(s_locate, "--window", locate.window, "Search half-width in pixels (default 40)");
  add(s_locate, "--sweeps", locate.sweeps, "Sweep limit (default 50)");
  add(s_locate, "--epsilon", locate.epsilon, "Stop when a sweep gains less (default 1e-6)");
  add(s_locate, "--sigma-floor", locate.sigma_floor, "Lower bound on every sigma (default 0.5)");
  add(s_locate, "--line-gap", locate.line_gap,
      "Gap that splits rows/columns when the init CSV has no ids (default 20)");
  locate.costmaps.opt =
      s_locate->add_flag("--costmaps", locate.costmaps.value, "Write a cost map PNG per plant");
  add_out(s_locate, locate);

  SynthFlags synth;
  auto* s_synth = app.add_subcommand(
      "synth",
      "Synthetic plot with ground truth. Writes image.png, mask.png, plants.csv, leaves.csv, "
      "init.csv (nominal grid) and spec.json. The spec comes from --spec, else the config key "
      "field, else defaults.");
  add(s_synth, "--spec", synth.spec, "FieldSpec JSON");
  add(s_synth, "--seed", synth.seed, "Override the spec seed");
  add_out(s_synth, synth);

  ScoreFlags score;
  auto* s_score = app.add_subcommand(
      "score",
      "Match estimated to true plants. Writes score.csv, score_summary.csv and score.json.");
  add(s_score, "--estimate", score.estimate, "Estimated plants CSV");
  add(s_score, "--truth", score.truth, "Truth plants CSV");
  add_out(s_score, score);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "uavpheno: config error: " << e.what() << '\n';
    return kConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    RunContext ctx(name, config_path);
    ctx.set_threads(ctx.param_threads(threads.opt, threads.value));

    auto dispatch = [&](CommonFlags& f, auto&& fn) {
      ctx.set_output_dir(f.out.opt, f.out.value);
      fn();
    };
    if (name == "undistort") dispatch(undistort, [&] { cmd_undistort(ctx, undistort); });
    else if (name == "rop") dispatch(rop, [&] { cmd_rop(ctx, rop); });
    else if (name == "absorient") dispatch(absorient, [&] { cmd_absorient(ctx, absorient); });
    else if (name == "dem") dispatch(dem, [&] { cmd_dem(ctx, dem); });
    else if (name == "ortho") dispatch(ortho, [&] { cmd_ortho(ctx, ortho); });
    else if (name == "segment") dispatch(segment, [&] { cmd_segment(ctx, segment); });
    else if (name == "count") dispatch(count, [&] { cmd_count(ctx, count); });
    else if (name == "heatmap") dispatch(heatmap, [&] { cmd_heatmap(ctx, heatmap); });
    else if (name == "leaves") dispatch(leaves, [&] { cmd_leaves(ctx, leaves); });
    else if (name == "locate") dispatch(locate, [&] { cmd_locate(ctx, locate); });
    else if (name == "synth") dispatch(synth, [&] { cmd_synth(ctx, synth); });
    else if (name == "score") dispatch(score, [&] { cmd_score(ctx, score); });
    ctx.write_manifest();
  } catch (const ConfigError& e) {
    err << "uavpheno " << name << ": config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InputError& e) {
    err << "uavpheno " << name << ": input error: " << e.what() << '\n';
    return kInputError;
  } catch (const NumericError& e) {
    err << "uavpheno " << name << ": numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    err << "uavpheno " << name << ": error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace uavpheno::cli
