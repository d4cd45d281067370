#include "uavpheno/localization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uavpheno/error.hpp"
#include "uavpheno/parallel.hpp"

namespace uavpheno {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Pixels are scored in fixed-size chunks so sums do not depend on the
// thread count.
constexpr std::size_t kChunk = 512;

double distance(const PixelCoord& z, double i, double j) noexcept {
  const double di = z.i - i;
  const double dj = z.j - j;
  return std::sqrt(di * di + dj * dj);
}

// Distance from each pixel to its nearest plant other than p.
std::vector<double> distances_excluding(const std::vector<PixelCoord>& zset,
                                        const PlantConfiguration& x, std::size_t p) {
  std::vector<double> d(zset.size(), kInf);
  for (std::size_t n = 0; n < zset.size(); ++n) {
    for (std::size_t q = 0; q < x.size(); ++q) {
      if (q != p) {
        d[n] = std::min(d[n], distance(zset[n], x[q].i, x[q].j));
      }
    }
  }
  return d;
}

double sum_min(const std::vector<PixelCoord>& zset, const std::vector<double>& d_other,
               const PlantPoint& c) noexcept {
  double s = 0.0;
  for (std::size_t n = 0; n < zset.size(); ++n) {
    s += std::min(d_other[n], distance(zset[n], c.i, c.j));
  }
  return s;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1), zero for a single value.
double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) {
    return 0.0;
  }
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) {
    ss += (x - m) * (x - m);
  }
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

void RowColumnAssignment::validate(std::size_t plants) const {
  if (row_of.size() != plants || col_of.size() != plants) {
    throw InputError("row/column assignment must list every plant");
  }
}

void IcdConfig::validate() const {
  if (window < 1) {
    throw ConfigError("window must be >= 1");
  }
  if (sweeps < 1) {
    throw ConfigError("sweeps must be >= 1");
  }
  if (!(epsilon >= 0.0)) {
    throw ConfigError("epsilon must be >= 0");
  }
  if (!(sigma_floor > 0.0) || !std::isfinite(sigma_floor)) {
    throw ConfigError("sigma_floor must be positive");
  }
  if (threads < 1) {
    throw ConfigError("threads must be >= 1");
  }
}

LocalizationMode parse_localization_mode(const std::string& name) {
  if (name == "full") {
    return LocalizationMode::Full;
  }
  if (name == "no_prior") {
    return LocalizationMode::NoPrior;
  }
  if (name == "no_intra_row") {
    return LocalizationMode::NoIntraRow;
  }
  throw ConfigError("unknown localization mode '" + name + "'");
}

std::string to_string(LocalizationMode mode) {
  switch (mode) {
    case LocalizationMode::Full:
      return "full";
    case LocalizationMode::NoPrior:
      return "no_prior";
    case LocalizationMode::NoIntraRow:
      return "no_intra_row";
  }
  return "full";
}

std::vector<PixelCoord> build_pixel_set(const LeafMask& mask) {
  std::vector<PixelCoord> z;
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (mask.at(i, j)) {
        z.push_back({i, j});
      }
    }
  }
  if (z.empty()) {
    throw InputError("leaf mask has no leaf pixels");
  }
  return z;
}

NearestPlant nearest_plant(PixelCoord z, const PlantConfiguration& x) {
  if (x.empty()) {
    throw InputError("need at least one plant");
  }
  NearestPlant best{0, distance(z, x[0].i, x[0].j)};
  for (std::size_t p = 1; p < x.size(); ++p) {
    const double d = distance(z, x[p].i, x[p].j);
    if (d < best.distance) {
      best = {p, d};
    }
  }
  return best;
}

double neg_log_likelihood(const std::vector<PixelCoord>& zset, const PlantConfiguration& x,
                          double sigma) {
  if (!(sigma > 0.0)) {
    throw ConfigError("sigma must be positive");
  }
  double s = 0.0;
  for (const auto& z : zset) {
    s += nearest_plant(z, x).distance;
  }
  return static_cast<double>(zset.size()) * std::log(sigma) + s / sigma;
}

PriorEntry prior_params(const PlantConfiguration& x, const RowColumnAssignment& assign,
                        std::size_t p, double sigma_floor) {
  assign.validate(x.size());
  if (p >= x.size()) {
    throw InputError("plant index out of range");
  }
  std::vector<double> row_i;
  std::vector<double> col_j;
  for (std::size_t q = 0; q < x.size(); ++q) {
    if (q == p) {
      continue;
    }
    if (assign.row_of[q] == assign.row_of[p]) {
      row_i.push_back(x[q].i);
    }
    if (assign.col_of[q] == assign.col_of[p]) {
      col_j.push_back(x[q].j);
    }
  }
  PriorEntry e;
  e.mu_i = x[p].i;
  e.mu_j = x[p].j;
  if (!row_i.empty()) {
    e.mu_i = mean(row_i);
    e.sigma_i = std::max(sample_std(row_i), sigma_floor);
  }
  if (!col_j.empty()) {
    e.mu_j = mean(col_j);
    e.sigma_j = std::max(sample_std(col_j), sigma_floor);
  }
  return e;
}

double prior_cost(const PlantPoint& c, const PriorEntry& prior, LocalizationMode mode) {
  if (mode == LocalizationMode::NoPrior) {
    return 0.0;
  }
  double cost = 0.0;
  if (mode == LocalizationMode::Full && std::isfinite(prior.sigma_i)) {
    const double u = (c.i - prior.mu_i) / prior.sigma_i;
    cost += 0.5 * u * u;
  }
  if (std::isfinite(prior.sigma_j)) {
    const double u = (c.j - prior.mu_j) / prior.sigma_j;
    cost += 0.5 * u * u;
  }
  return cost;
}

double map_cost(std::size_t p, const PlantPoint& candidate, const std::vector<PixelCoord>& zset,
                const PlantConfiguration& x, double sigma, const PriorEntry& prior,
                LocalizationMode mode) {
  if (p >= x.size()) {
    throw InputError("plant index out of range");
  }
  if (!(sigma > 0.0)) {
    throw ConfigError("sigma must be positive");
  }
  const auto d_other = distances_excluding(zset, x, p);
  return sum_min(zset, d_other, candidate) / sigma + prior_cost(candidate, prior, mode);
}

PlantPoint kmeans_update(const std::vector<PixelCoord>& zset, const PlantConfiguration& x,
                         std::size_t p) {
  if (p >= x.size()) {
    throw InputError("plant index out of range");
  }
  double si = 0.0;
  double sj = 0.0;
  std::size_t count = 0;
  for (const auto& z : zset) {
    if (nearest_plant(z, x).index == p) {
      si += z.i;
      sj += z.j;
      ++count;
    }
  }
  if (count == 0) {
    throw NumericError("plant " + std::to_string(p) + " owns no leaf pixel");
  }
  return {si / static_cast<double>(count), sj / static_cast<double>(count)};
}

double estimate_sigma(const std::vector<PixelCoord>& zset, const PlantConfiguration& x,
                      double sigma_floor) {
  if (zset.empty()) {
    throw InputError("empty pixel set");
  }
  double s = 0.0;
  for (const auto& z : zset) {
    s += nearest_plant(z, x).distance;
  }
  return std::max(s / static_cast<double>(zset.size()), sigma_floor);
}

CostMap cost_map(std::size_t p, const std::vector<PixelCoord>& zset, const PlantConfiguration& x,
                 double sigma, const PriorEntry& prior, LocalizationMode mode, int window,
                 int image_width, int image_height, int threads) {
  if (p >= x.size()) {
    throw InputError("plant index out of range");
  }
  if (window < 0) {
    throw ConfigError("window must be >= 0");
  }
  if (!(sigma > 0.0)) {
    throw ConfigError("sigma must be positive");
  }
  CostMap map;
  map.size = 2 * window + 1;
  map.i0 = static_cast<int>(std::lround(x[p].i)) - window;
  map.j0 = static_cast<int>(std::lround(x[p].j)) - window;
  const int size = map.size;
  const std::size_t cells = static_cast<std::size_t>(size) * static_cast<std::size_t>(size);

  const auto d_other = distances_excluding(zset, x, p);

  // A pixel farther from the window than from its nearest other plant adds
  // the same d_other to every candidate; only the rest are scored.
  double base = 0.0;
  std::vector<std::size_t> active;
  const double lo_i = map.i0;
  const double hi_i = map.i0 + size - 1;
  const double lo_j = map.j0;
  const double hi_j = map.j0 + size - 1;
  for (std::size_t n = 0; n < zset.size(); ++n) {
    const double gi = std::max({lo_i - zset[n].i, 0.0, zset[n].i - hi_i});
    const double gj = std::max({lo_j - zset[n].j, 0.0, zset[n].j - hi_j});
    if (std::isfinite(d_other[n]) && d_other[n] <= std::sqrt(gi * gi + gj * gj)) {
      base += d_other[n];
    } else {
      active.push_back(n);
    }
  }

  const std::size_t chunks = (active.size() + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial(chunks);
  parallel_for_rows(static_cast<int>(chunks), threads, [&](int begin, int end) {
    for (int c = begin; c < end; ++c) {
      auto& acc = partial[static_cast<std::size_t>(c)];
      acc.assign(cells, 0.0);
      const std::size_t first = static_cast<std::size_t>(c) * kChunk;
      const std::size_t last = std::min(active.size(), first + kChunk);
      for (std::size_t k = first; k < last; ++k) {
        const std::size_t n = active[k];
        const PixelCoord z = zset[n];
        const double dn = d_other[n];
        if (!std::isfinite(dn)) {
          for (int a = 0; a < size; ++a) {
            const double di = z.i - (map.i0 + a);
            double* row = acc.data() + static_cast<std::size_t>(a) * static_cast<std::size_t>(size);
            for (int b = 0; b < size; ++b) {
              const double dj = z.j - (map.j0 + b);
              row[b] += std::sqrt(di * di + dj * dj);
            }
          }
          continue;
        }
        // Only candidates strictly inside the disk of radius d_other around
        // z change this pixel's term; elsewhere it stays d_other.
        const int a_lo = std::max(0, static_cast<int>(std::floor(z.i - dn)) - map.i0);
        const int a_hi = std::min(size - 1, static_cast<int>(std::ceil(z.i + dn)) - map.i0);
        for (int a = a_lo; a <= a_hi; ++a) {
          const double di = z.i - (map.i0 + a);
          const double rem = dn * dn - di * di;
          if (rem <= 0.0) {
            continue;
          }
          const double reach = std::sqrt(rem);
          const int b_lo = std::max(0, static_cast<int>(std::floor(z.j - reach)) - map.j0);
          const int b_hi = std::min(size - 1, static_cast<int>(std::ceil(z.j + reach)) - map.j0);
          double* row = acc.data() + static_cast<std::size_t>(a) * static_cast<std::size_t>(size);
          for (int b = b_lo; b <= b_hi; ++b) {
            const double dj = z.j - (map.j0 + b);
            row[b] += std::min(0.0, std::sqrt(di * di + dj * dj) - dn);
          }
        }
      }
    }
  });
  // Finite-distance active pixels contribute d_other plus the (negative)
  // correction accumulated above.
  for (std::size_t n : active) {
    if (std::isfinite(d_other[n])) {
      base += d_other[n];
    }
  }

  map.cost.assign(cells, 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t k = 0; k < cells; ++k) {
      map.cost[k] += partial[c][k];
    }
  }
  for (int a = 0; a < size; ++a) {
    for (int b = 0; b < size; ++b) {
      const PlantPoint cand{static_cast<double>(map.i0 + a), static_cast<double>(map.j0 + b)};
      double& cost = map.cost[static_cast<std::size_t>(a * size + b)];
      if (cand.i < 0 || cand.j < 0 || cand.i >= image_height || cand.j >= image_width) {
        cost = kInf;
      } else {
        cost = (base + cost) / sigma + prior_cost(cand, prior, mode);
      }
    }
  }
  return map;
}

double total_cost(const std::vector<PixelCoord>& zset, const PlantConfiguration& x, double sigma,
                  const std::vector<PriorEntry>& priors, LocalizationMode mode) {
  double cost = neg_log_likelihood(zset, x, sigma);
  for (std::size_t p = 0; p < x.size() && p < priors.size(); ++p) {
    cost += prior_cost(x[p], priors[p], mode);
  }
  return cost;
}

IcdResult icd_optimize(const std::vector<PixelCoord>& zset, const PlantConfiguration& x0,
                       const RowColumnAssignment& assign, const IcdConfig& config,
                       int image_width, int image_height) {
  config.validate();
  if (zset.empty()) {
    throw InputError("empty pixel set");
  }
  if (x0.empty()) {
    throw InputError("need at least one plant");
  }
  assign.validate(x0.size());
  for (const auto& p : x0) {
    if (!(p.i >= 0 && p.j >= 0 && p.i <= image_height - 1 && p.j <= image_width - 1)) {
      throw InputError("initial plant position outside the image");
    }
  }

  IcdResult r;
  r.plants = x0;
  r.sigma = estimate_sigma(zset, r.plants, config.sigma_floor);
  const std::size_t P = r.plants.size();
  std::vector<PlantConfiguration> seen{r.plants};

  for (int sweep = 1; sweep <= config.sweeps; ++sweep) {
    std::vector<PriorEntry> priors(P);
    for (std::size_t p = 0; p < P; ++p) {
      priors[p] = prior_params(r.plants, assign, p, config.sigma_floor);
    }
    double J = total_cost(zset, r.plants, r.sigma, priors, config.mode);
    const double J0 = J;
    r.sweep_start.push_back(r.trace.size());
    r.trace.push_back(J);
    int accepted = 0;

    for (std::size_t p = 0; p < P; ++p) {
      const CostMap cm = cost_map(p, zset, r.plants, r.sigma, priors[p], config.mode,
                                  config.window, image_width, image_height, config.threads);
      const double current =
          map_cost(p, r.plants[p], zset, r.plants, r.sigma, priors[p], config.mode);
      // Candidates within rounding of the minimum tie; the first in
      // row-major order wins, whatever order the sums were taken in.
      const double lowest = *std::min_element(cm.cost.begin(), cm.cost.end());
      const double tie = lowest + 1e-12 * std::max(1.0, std::abs(lowest));
      const std::size_t best = static_cast<std::size_t>(
          std::find_if(cm.cost.begin(), cm.cost.end(), [&](double v) { return v <= tie; }) -
          cm.cost.begin());
      // Margin absorbs summation-order noise between the two evaluations.
      if (cm.cost[best] < current - 1e-9 * std::max(1.0, std::abs(current))) {
        const int a = static_cast<int>(best) / cm.size;
        const int b = static_cast<int>(best) % cm.size;
        r.plants[p] = {static_cast<double>(cm.i0 + a), static_cast<double>(cm.j0 + b)};
        J = total_cost(zset, r.plants, r.sigma, priors, config.mode);
        r.trace.push_back(J);
        ++accepted;
      }
    }

    std::vector<std::size_t> owned(P, 0);
    for (const auto& z : zset) {
      ++owned[nearest_plant(z, r.plants).index];
    }
    for (std::size_t p = 0; p < P; ++p) {
      if (owned[p] == 0) {
        r.empty_clusters.push_back({sweep, p});
      }
    }

    r.sweeps = sweep;
    r.sigma = estimate_sigma(zset, r.plants, config.sigma_floor);
    if (accepted == 0 || J0 - J < config.epsilon) {
      r.converged = true;
      break;
    }
    // Priors move with the plants, so sweeps can revisit a configuration.
    if (std::find(seen.begin(), seen.end(), r.plants) != seen.end()) {
      r.cycled = true;
      break;
    }
    seen.push_back(r.plants);
  }
  return r;
}

PlantConfiguration locate_plants(const LeafMask& mask, const PlantConfiguration& x0,
                                 const RowColumnAssignment& assign, const IcdConfig& config,
                                 const std::vector<Region>& regions,
                                 std::vector<IcdResult>* per_region) {
  assign.validate(x0.size());
  std::vector<Region> tiles = regions;
  if (tiles.empty()) {
    tiles.push_back({0, 0, mask.height(), mask.width()});
  }
  std::vector<int> region_of(x0.size(), -1);
  for (std::size_t p = 0; p < x0.size(); ++p) {
    for (std::size_t r = 0; r < tiles.size(); ++r) {
      const auto& t = tiles[r];
      if (x0[p].i >= t.i0 && x0[p].i < t.i0 + t.height && x0[p].j >= t.j0 &&
          x0[p].j < t.j0 + t.width) {
        if (region_of[p] >= 0) {
          throw ConfigError("plant " + std::to_string(p) + " lies in overlapping regions");
        }
        region_of[p] = static_cast<int>(r);
      }
    }
    if (region_of[p] < 0) {
      throw ConfigError("plant " + std::to_string(p) + " lies outside every region");
    }
  }

  PlantConfiguration out = x0;
  if (per_region != nullptr) {
    per_region->clear();
  }
  for (std::size_t r = 0; r < tiles.size(); ++r) {
    const auto& t = tiles[r];
    std::vector<std::size_t> members;
    for (std::size_t p = 0; p < x0.size(); ++p) {
      if (region_of[p] == static_cast<int>(r)) {
        members.push_back(p);
      }
    }
    if (members.empty()) {
      if (per_region != nullptr) {
        per_region->emplace_back();
      }
      continue;
    }
    const LeafMask crop = mask.crop(t.i0, t.j0, t.height, t.width);
    const auto zset = build_pixel_set(crop);
    PlantConfiguration local;
    RowColumnAssignment sub;
    for (std::size_t p : members) {
      local.push_back({x0[p].i - t.i0, x0[p].j - t.j0});
      sub.row_of.push_back(assign.row_of[p]);
      sub.col_of.push_back(assign.col_of[p]);
    }
    IcdResult res = icd_optimize(zset, local, sub, config, crop.width(), crop.height());
    for (std::size_t k = 0; k < members.size(); ++k) {
      out[members[k]] = {res.plants[k].i + t.i0, res.plants[k].j + t.j0};
    }
    if (per_region != nullptr) {
      per_region->push_back(std::move(res));
    }
  }
  return out;
}

std::vector<int> cluster_lines(const std::vector<double>& values, double gap) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<int> id(values.size(), 0);
  int line = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && values[order[k]] - values[order[k - 1]] > gap) {
      ++line;
    }
    id[order[k]] = line;
  }
  return id;
}

}  // namespace uavpheno
