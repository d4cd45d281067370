#include "uavpheno/morphology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "uavpheno/csv.hpp"
#include "uavpheno/error.hpp"

namespace uavpheno {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double angle, double period) noexcept {
  double r = std::fmod(angle, period);
  if (r < 0.0) {
    r += period;
  }
  // fmod of a value just below a multiple can round up to `period`.
  return r >= period ? 0.0 : r;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller root wins so component ids are stable.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) {
      return;
    }
    if (b < a) {
      std::swap(a, b);
    }
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::vector<PixelCoord> bresenham(PixelCoord a, PixelCoord b) {
  std::vector<PixelCoord> out;
  int i = a.i;
  int j = a.j;
  const int di = std::abs(b.i - a.i);
  const int dj = std::abs(b.j - a.j);
  const int si = a.i < b.i ? 1 : -1;
  const int sj = a.j < b.j ? 1 : -1;
  int err = dj - di;
  while (true) {
    out.push_back({i, j});
    if (i == b.i && j == b.j) {
      break;
    }
    const int e2 = 2 * err;
    if (e2 > -di) {
      err -= di;
      j += sj;
    }
    if (e2 < dj) {
      err += dj;
      i += si;
    }
  }
  return out;
}

// Running direction of a set of slices: doubled-angle mean of theta.
double mean_direction(const std::vector<LeafSlice>& slices) noexcept {
  double c = 0.0;
  double s = 0.0;
  for (const auto& sl : slices) {
    c += std::cos(2.0 * sl.theta);
    s += std::sin(2.0 * sl.theta);
  }
  return wrap(0.5 * std::atan2(s, c), kPi);
}

// Position of a slice midpoint along direction phi (x right, y up).
double along(const LeafSlice& s, double phi) noexcept {
  const auto [row, col] = s.midpoint();
  return col * std::cos(phi) - row * std::sin(phi);
}

void order_slices(LeafSegment& seg) {
  const double phi = mean_direction(seg.slices);
  std::vector<std::pair<double, std::size_t>> key(seg.slices.size());
  for (std::size_t k = 0; k < seg.slices.size(); ++k) {
    key[k] = {along(seg.slices[k], phi), k};
  }
  std::stable_sort(key.begin(), key.end());
  std::vector<LeafSlice> ordered;
  ordered.reserve(seg.slices.size());
  for (const auto& [pos, k] : key) {
    ordered.push_back(std::move(seg.slices[k]));
  }
  seg.slices = std::move(ordered);
}

const std::vector<PixelCoord>& footprint(const LeafSlice& s) noexcept {
  return s.owned.empty() ? s.pixels : s.owned;
}

void sort_pixels(std::vector<PixelCoord>& px) {
  std::sort(px.begin(), px.end(), [](PixelCoord l, PixelCoord r) {
    return l.i != r.i ? l.i < r.i : l.j < r.j;
  });
  px.erase(std::unique(px.begin(), px.end()), px.end());
}

}  // namespace

void AngleThresholds::validate() const {
  for (double t : {ta, tb, tc}) {
    if (!(t > 0.0 && t < kPi)) {
      throw ConfigError("angle thresholds must lie in (0, pi)");
    }
  }
}

void MorphologyConfig::validate() const {
  angles.validate();
  if (gradient.smooth_radius < 0 || !(gradient.magnitude_floor >= 0.0)) {
    throw ConfigError("smooth_radius and magnitude_floor must be non-negative");
  }
  if (max_width < 1 || max_gap < 1) {
    throw ConfigError("max_width and max_gap must be >= 1");
  }
  if (min_slices < 1) {
    throw ConfigError("min_slices must be >= 1");
  }
}

double LeafSlice::span() const noexcept {
  return std::hypot(static_cast<double>(a.i - b.i), static_cast<double>(a.j - b.j));
}

std::pair<double, double> LeafSlice::midpoint() const noexcept {
  return {0.5 * (a.i + b.i), 0.5 * (a.j + b.j)};
}

GradientField gradient_angles(const LeafMask& mask, GradientOptions opts) {
  const int w = mask.width();
  const int h = mask.height();
  GradientField g;
  g.width = w;
  g.height = h;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  g.angle.assign(n, 0.0);
  g.magnitude.assign(n, 0.0);
  g.valid.assign(n, 0);
  if (n == 0) {
    return g;
  }

  const int r = std::max(0, opts.smooth_radius);
  std::vector<double> sat(static_cast<std::size_t>(w + 1) * static_cast<std::size_t>(h + 1), 0.0);
  auto S = [&](int i, int j) -> double& {
    return sat[static_cast<std::size_t>(i) * static_cast<std::size_t>(w + 1) +
               static_cast<std::size_t>(j)];
  };
  for (int i = 0; i < h; ++i) {
    double row = 0.0;
    for (int j = 0; j < w; ++j) {
      row += mask.at(i, j) ? 1.0 : 0.0;
      S(i + 1, j + 1) = S(i, j + 1) + row;
    }
  }
  const double area = static_cast<double>((2 * r + 1) * (2 * r + 1));
  std::vector<double> smooth(n, 0.0);
  for (int i = 0; i < h; ++i) {
    const int i0 = std::max(0, i - r);
    const int i1 = std::min(h, i + r + 1);
    for (int j = 0; j < w; ++j) {
      const int j0 = std::max(0, j - r);
      const int j1 = std::min(w, j + r + 1);
      smooth[g.index(i, j)] = (S(i1, j1) - S(i0, j1) - S(i1, j0) + S(i0, j0)) / area;
    }
  }
  auto value = [&](int i, int j) {
    return (i < 0 || j < 0 || i >= h || j >= w) ? 0.0 : smooth[g.index(i, j)];
  };
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double gx = 0.5 * (value(i, j + 1) - value(i, j - 1));
      const double gy = 0.5 * (value(i - 1, j) - value(i + 1, j));
      const std::size_t k = g.index(i, j);
      g.magnitude[k] = std::hypot(gx, gy);
      if (g.magnitude[k] > opts.magnitude_floor) {
        g.valid[k] = 1;
        g.angle[k] = wrap(std::atan2(gy, gx), kTwoPi);
      }
    }
  }
  return g;
}

bool opposite_edge_test(double ga, double gb, double ta) noexcept {
  const double d = wrap(ga - gb + kPi, kTwoPi);
  return std::min(d, kTwoPi - d) < ta;
}

double slice_angle(double ga, double gb) noexcept { return wrap(0.5 * (ga + gb), kPi); }

double folded_angle_distance(double t1, double t2) noexcept {
  const double d = wrap(std::abs(t1 - t2), kPi);
  return std::min(d, kPi - d);
}

std::vector<LeafSlice> extract_slices(const LeafMask& mask, const GradientField& grad, double ta,
                                      int max_width) {
  if (max_width < 1) {
    throw ConfigError("max_width must be >= 1");
  }
  if (grad.width != mask.width() || grad.height != mask.height()) {
    throw InputError("gradient field and mask differ in size");
  }
  const int w = mask.width();
  const int h = mask.height();

  auto is_edge = [&](int i, int j) {
    return mask.at(i, j) && (!mask.get(i - 1, j) || !mask.get(i + 1, j) || !mask.get(i, j - 1) ||
                             !mask.get(i, j + 1));
  };

  std::vector<LeafSlice> candidates;
  std::unordered_set<std::uint64_t> seen;
  constexpr double kStep = 0.25;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      if (!is_edge(i, j) || !grad.is_valid(i, j)) {
        continue;
      }
      const double g = grad.angle_at(i, j);
      const double dj = std::cos(g);
      const double di = -std::sin(g);
      PixelCoord cur{i, j};
      bool exited = false;
      for (double t = kStep; t <= max_width + 1.0; t += kStep) {
        const PixelCoord next{static_cast<int>(std::lround(i + t * di)),
                              static_cast<int>(std::lround(j + t * dj))};
        if (next == cur) {
          continue;
        }
        if (!mask.get(next.i, next.j)) {
          exited = true;
          break;
        }
        cur = next;
      }
      if (!exited) {
        continue;
      }
      const PixelCoord a{i, j};
      const PixelCoord b = cur;
      if (a == b || !grad.is_valid(b.i, b.j)) {
        continue;
      }
      const double span = std::hypot(static_cast<double>(a.i - b.i), static_cast<double>(a.j - b.j));
      if (span > max_width) {
        continue;
      }
      const double gb = grad.angle_at(b.i, b.j);
      if (!opposite_edge_test(g, gb, ta)) {
        continue;
      }
      const auto ka = static_cast<std::uint64_t>(grad.index(a.i, a.j));
      const auto kb = static_cast<std::uint64_t>(grad.index(b.i, b.j));
      const std::uint64_t key = (std::min(ka, kb) << 32) | std::max(ka, kb);
      if (!seen.insert(key).second) {
        continue;
      }
      LeafSlice s;
      s.a = a;
      s.b = b;
      s.ga = g;
      s.gb = gb;
      s.theta = slice_angle(g, gb);
      s.pixels = bresenham(a, b);
      candidates.push_back(std::move(s));
    }
  }

  // Stroke-width rule: each pixel goes to its shortest covering slice.
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  constexpr double kTie = 1e-9;
  std::vector<double> best_span(n, std::numeric_limits<double>::infinity());
  for (const auto& s : candidates) {
    const double span = s.span();
    for (const auto& p : s.pixels) {
      auto& b = best_span[grad.index(p.i, p.j)];
      b = std::min(b, span);
    }
  }
  std::vector<int> owner(n, -1);
  std::vector<std::uint8_t> tied(n, 0);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double span = candidates[k].span();
    for (const auto& p : candidates[k].pixels) {
      const std::size_t idx = grad.index(p.i, p.j);
      if (span <= best_span[idx] + kTie) {
        if (owner[idx] < 0) {
          owner[idx] = static_cast<int>(k);
        } else if (owner[idx] != static_cast<int>(k)) {
          tied[idx] = 1;
        }
      }
    }
  }
  // Equal-length ties: the slice whose theta is closest to the median theta
  // of every slice covering the pixel.
  std::map<std::size_t, std::vector<std::size_t>> covering;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    for (const auto& p : candidates[k].pixels) {
      const std::size_t idx = grad.index(p.i, p.j);
      if (tied[idx]) {
        covering[idx].push_back(k);
      }
    }
  }
  for (auto& [idx, list] : covering) {
    const double ref = candidates[static_cast<std::size_t>(owner[idx])].theta;
    std::vector<double> thetas;
    thetas.reserve(list.size());
    for (std::size_t k : list) {
      double d = wrap(candidates[k].theta - ref + 0.5 * kPi, kPi) - 0.5 * kPi;
      thetas.push_back(ref + d);
    }
    std::nth_element(thetas.begin(), thetas.begin() + static_cast<std::ptrdiff_t>((thetas.size() - 1) / 2),
                     thetas.end());
    const double median = thetas[(thetas.size() - 1) / 2];
    std::size_t pick = static_cast<std::size_t>(owner[idx]);
    double pick_dist = folded_angle_distance(candidates[pick].theta, median);
    for (std::size_t k : list) {
      if (candidates[k].span() > best_span[idx] + kTie) {
        continue;
      }
      const double d = folded_angle_distance(candidates[k].theta, median);
      if (d < pick_dist - 1e-12 || (std::abs(d - pick_dist) <= 1e-12 && k < pick)) {
        pick = k;
        pick_dist = d;
      }
    }
    owner[idx] = static_cast<int>(pick);
  }

  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const int o = owner[grad.index(i, j)];
      if (o >= 0) {
        candidates[static_cast<std::size_t>(o)].owned.push_back({i, j});
      }
    }
  }
  std::vector<LeafSlice> kept;
  for (auto& s : candidates) {
    if (!s.owned.empty()) {
      kept.push_back(std::move(s));
    }
  }
  return kept;
}

std::vector<LeafSegment> merge_adjacent_slices(const std::vector<LeafSlice>& slices, double tb) {
  if (slices.empty()) {
    return {};
  }
  int h = 0;
  int w = 0;
  for (const auto& s : slices) {
    for (const auto& p : footprint(s)) {
      if (p.i < 0 || p.j < 0) {
        throw InputError("slice pixel with negative coordinates");
      }
      h = std::max(h, p.i + 1);
      w = std::max(w, p.j + 1);
    }
  }
  const auto index = [w](int i, int j) {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(w) + static_cast<std::size_t>(j);
  };
  UnionFind uf(slices.size());
  auto try_unite = [&](std::size_t a, std::size_t b) {
    if (a != b && folded_angle_distance(slices[a].theta, slices[b].theta) < tb) {
      uf.unite(a, b);
    }
  };

  std::vector<int> label(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  for (std::size_t k = 0; k < slices.size(); ++k) {
    for (const auto& p : footprint(slices[k])) {
      int& l = label[index(p.i, p.j)];
      if (l >= 0) {
        try_unite(static_cast<std::size_t>(l), k);  // overlapping footprints touch
      } else {
        l = static_cast<int>(k);
      }
    }
  }
  static constexpr std::array<std::array<int, 2>, 4> kForward{{{0, 1}, {1, -1}, {1, 0}, {1, 1}}};
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const int l = label[index(i, j)];
      if (l < 0) {
        continue;
      }
      for (const auto& [oi, oj] : kForward) {
        const int ni = i + oi;
        const int nj = j + oj;
        if (ni < 0 || nj < 0 || ni >= h || nj >= w) {
          continue;
        }
        const int m = label[index(ni, nj)];
        if (m >= 0 && m != l) {
          try_unite(static_cast<std::size_t>(l), static_cast<std::size_t>(m));
        }
      }
    }
  }

  std::map<std::size_t, std::size_t> component;
  std::vector<LeafSegment> segments;
  for (std::size_t k = 0; k < slices.size(); ++k) {
    const std::size_t root = uf.find(k);
    auto [it, inserted] = component.try_emplace(root, segments.size());
    if (inserted) {
      segments.emplace_back();
    }
    LeafSegment& seg = segments[it->second];
    seg.slices.push_back(slices[k]);
    const auto& fp = footprint(slices[k]);
    seg.pixels.insert(seg.pixels.end(), fp.begin(), fp.end());
  }
  for (auto& seg : segments) {
    sort_pixels(seg.pixels);
    order_slices(seg);
  }
  return segments;
}

std::vector<LeafSegment> bridge_discontinuities(const std::vector<LeafSegment>& segments,
                                                const GradientField& grad, double tc,
                                                int max_gap) {
  if (max_gap < 1) {
    throw ConfigError("max_gap must be >= 1");
  }
  const int w = grad.width;
  const int h = grad.height;
  constexpr double kTerminalBand = 1.5;  // pixels from either end of the chain

  struct Label {
    int segment = -1;
    int slice = -1;
  };
  std::vector<Label> label(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  // end[s][k]: -1 / +1 for a slice at the low / high end of the chain, 0 inside,
  // 2 when it is both (very short chains).
  std::vector<std::vector<int>> end(segments.size());
  std::vector<double> axis(segments.size());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    axis[s] = mean_direction(seg.slices);
    end[s].assign(seg.slices.size(), 0);
    if (seg.slices.empty()) {
      continue;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& sl : seg.slices) {
      lo = std::min(lo, along(sl, axis[s]));
      hi = std::max(hi, along(sl, axis[s]));
    }
    for (std::size_t k = 0; k < seg.slices.size(); ++k) {
      const double pos = along(seg.slices[k], axis[s]);
      const bool low = pos <= lo + kTerminalBand;
      const bool high = pos >= hi - kTerminalBand;
      end[s][k] = low && high ? 2 : low ? -1 : high ? 1 : 0;
      for (const auto& p : footprint(seg.slices[k])) {
        if (p.i >= 0 && p.j >= 0 && p.i < h && p.j < w) {
          label[grad.index(p.i, p.j)] = {static_cast<int>(s), static_cast<int>(k)};
        }
      }
    }
  }

  std::vector<std::size_t> order(segments.size());
  std::iota(order.begin(), order.end(), 0);
  auto first_pixel = [&](std::size_t s) {
    const auto& px = segments[s].pixels;
    return px.empty() ? std::numeric_limits<std::size_t>::max() : grad.index(px.front().i, px.front().j);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return first_pixel(l) < first_pixel(r); });

  UnionFind uf(segments.size());
  for (std::size_t s : order) {
    const auto& seg = segments[s];
    const double ax = std::cos(axis[s]);
    const double ay = std::sin(axis[s]);
    for (std::size_t k = 0; k < seg.slices.size(); ++k) {
      if (end[s][k] == 0) {
        continue;
      }
      const LeafSlice& term = seg.slices[k];
      double ux = std::cos(term.theta);
      double uy = std::sin(term.theta);
      if (ux * ax + uy * ay < 0.0) {
        ux = -ux;
        uy = -uy;
      }
      std::vector<double> signs;
      if (end[s][k] == -1 || end[s][k] == 2) {
        signs.push_back(-1.0);
      }
      if (end[s][k] == 1 || end[s][k] == 2) {
        signs.push_back(1.0);
      }
      for (double sign : signs) {
        const double dj = sign * ux;
        const double di = -sign * uy;
        for (const auto& start : term.pixels) {
          for (int step = 1; step <= max_gap; ++step) {
            const int pi = static_cast<int>(std::lround(start.i + step * di));
            const int pj = static_cast<int>(std::lround(start.j + step * dj));
            if (pi < 0 || pj < 0 || pi >= h || pj >= w) {
              break;
            }
            const Label hit = label[grad.index(pi, pj)];
            if (hit.segment < 0 || static_cast<std::size_t>(hit.segment) == s) {
              continue;
            }
            const auto other = static_cast<std::size_t>(hit.segment);
            const auto other_slice = static_cast<std::size_t>(hit.slice);
            if (end[other][other_slice] != 0 &&
                folded_angle_distance(term.theta, segments[other].slices[other_slice].theta) < tc) {
              uf.unite(s, other);
              break;
            }
          }
        }
      }
    }
  }

  std::map<std::size_t, std::size_t> component;
  std::vector<LeafSegment> merged;
  for (std::size_t s : order) {
    const std::size_t root = uf.find(s);
    auto [it, inserted] = component.try_emplace(root, merged.size());
    if (inserted) {
      merged.emplace_back();
    }
    LeafSegment& dst = merged[it->second];
    dst.slices.insert(dst.slices.end(), segments[s].slices.begin(), segments[s].slices.end());
    dst.pixels.insert(dst.pixels.end(), segments[s].pixels.begin(), segments[s].pixels.end());
  }
  for (auto& seg : merged) {
    sort_pixels(seg.pixels);
    order_slices(seg);
  }
  return merged;
}

namespace {

// Chain midpoints are averaged in bins this long (pixels) along the running
// direction; finer bins let rasterisation zig-zag inflate the arc length.
constexpr double kBin = 4.0;
// The leaf edge lies between the outermost leaf pixel centre and the next
// background one: half a pixel past the extreme centres, in total.
constexpr double kEndAllowance = 0.5;

struct ChainGeometry {
  double arc = 0.0;     // midpoint chain length
  double ext_lo = 0.0;  // leaf pixels beyond the first midpoint, along the axis
  double ext_hi = 0.0;  // and beyond the last one
  double mean_span = 0.0;

  double length() const noexcept { return arc + ext_lo + ext_hi + kEndAllowance; }
};

ChainGeometry chain_geometry(const LeafSegment& segment) {
  const double phi = mean_direction(segment.slices);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  std::map<long, std::array<double, 3>> bins;
  double span_sum = 0.0;
  for (const auto& sl : segment.slices) {
    const auto [row, col] = sl.midpoint();
    auto& b = bins[std::lround(std::floor(along(sl, phi) / kBin))];
    b[0] += row;
    b[1] += col;
    b[2] += 1.0;
    span_sum += sl.span() + 1.0;
  }
  ChainGeometry g;
  g.mean_span = span_sum / static_cast<double>(segment.slices.size());
  bool first = true;
  double prev_row = 0.0;
  double prev_col = 0.0;
  double first_pos = 0.0;
  double last_pos = 0.0;
  for (const auto& [key, b] : bins) {
    const double row = b[0] / b[2];
    const double col = b[1] / b[2];
    const double pos = col * c - row * s;
    if (first) {
      first_pos = pos;
    } else {
      g.arc += std::hypot(row - prev_row, col - prev_col);
    }
    first = false;
    prev_row = row;
    prev_col = col;
    last_pos = pos;
  }
  double lo = first_pos;
  double hi = last_pos;
  for (const auto& p : segment.pixels) {
    const double pos = p.j * c - p.i * s;
    lo = std::min(lo, pos);
    hi = std::max(hi, pos);
  }
  g.ext_lo = first_pos - lo;
  g.ext_hi = hi - last_pos;
  return g;
}

bool is_fragment(const LeafSegment& segment, int min_slices) {
  if (static_cast<int>(segment.slices.size()) < min_slices) {
    return true;
  }
  // Slices run across a leaf, so a chain shorter than its slices is made of
  // cross-grain slices, e.g. the ones spanning a leaf tip end to end.
  const ChainGeometry g = chain_geometry(segment);
  return g.length() < g.mean_span;
}

}  // namespace

LeafMetrics leaf_metrics(const LeafSegment& segment, double gsd) {
  if (segment.slices.empty()) {
    throw InputError("leaf metrics need a non-empty segment");
  }
  const ChainGeometry g = chain_geometry(segment);
  LeafMetrics m;
  m.length = g.length() * gsd;
  m.width = g.mean_span * gsd;
  m.area = static_cast<double>(segment.pixels.size()) * gsd * gsd;
  return m;
}

MorphologyResult segment_individual_leaves(const LeafMask& mask, const MorphologyConfig& config) {
  config.validate();
  MorphologyResult result;
  result.gradient = gradient_angles(mask, config.gradient);
  result.slices = extract_slices(mask, result.gradient, config.angles.ta, config.max_width);
  std::vector<LeafSegment> fragments;
  auto keep_leaves = [&](std::vector<LeafSegment> segments) {
    std::vector<LeafSegment> kept;
    for (auto& seg : segments) {
      if (is_fragment(seg, config.min_slices)) {
        fragments.push_back(std::move(seg));
      } else {
        kept.push_back(std::move(seg));
      }
    }
    return kept;
  };
  // Fragments are kept out of bridging: at a crossing, the short slices in
  // the junction would otherwise chain every arm together.
  auto segments = keep_leaves(merge_adjacent_slices(result.slices, config.angles.tb));
  result.leaves = keep_leaves(
      bridge_discontinuities(segments, result.gradient, config.angles.tc, config.max_gap));

  // Fragment pixels go to the leaf they touch most (8-connectivity), so leaf
  // tips and junctions still count towards area. Isolated fragments drop.
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> owner(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  for (std::size_t k = 0; k < result.leaves.size(); ++k) {
    for (const auto& p : result.leaves[k].pixels) {
      owner[result.gradient.index(p.i, p.j)] = static_cast<int>(k);
    }
  }
  std::vector<std::vector<PixelCoord>> extra(result.leaves.size());
  for (const auto& frag : fragments) {
    std::map<int, int> contacts;
    for (const auto& p : frag.pixels) {
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          const int i = p.i + di;
          const int j = p.j + dj;
          if ((di != 0 || dj != 0) && i >= 0 && j >= 0 && i < h && j < w) {
            const int o = owner[result.gradient.index(i, j)];
            if (o >= 0) {
              ++contacts[o];
            }
          }
        }
      }
    }
    int best = -1;
    int best_count = 0;
    for (const auto& [leaf, count] : contacts) {
      if (count > best_count) {
        best = leaf;
        best_count = count;
      }
    }
    if (best >= 0) {
      auto& dst = extra[static_cast<std::size_t>(best)];
      dst.insert(dst.end(), frag.pixels.begin(), frag.pixels.end());
    }
  }
  std::deque<PixelCoord> frontier;
  for (std::size_t k = 0; k < result.leaves.size(); ++k) {
    for (const auto& p : extra[k]) {
      owner[result.gradient.index(p.i, p.j)] = static_cast<int>(k);
    }
  }
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      if (owner[result.gradient.index(i, j)] >= 0) {
        frontier.push_back({i, j});
      }
    }
  }
  // Mask pixels no slice reached (gaps between diagonal lines, leaf tips)
  // join the nearest leaf through the mask, breadth first.
  static constexpr std::array<std::array<int, 2>, 4> kSteps{{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};
  while (!frontier.empty()) {
    const PixelCoord p = frontier.front();
    frontier.pop_front();
    const int o = owner[result.gradient.index(p.i, p.j)];
    for (const auto& [di, dj] : kSteps) {
      const int i = p.i + di;
      const int j = p.j + dj;
      if (mask.get(i, j) && owner[result.gradient.index(i, j)] < 0) {
        owner[result.gradient.index(i, j)] = o;
        extra[static_cast<std::size_t>(o)].push_back({i, j});
        frontier.push_back({i, j});
      }
    }
  }
  for (std::size_t k = 0; k < result.leaves.size(); ++k) {
    auto& px = result.leaves[k].pixels;
    px.insert(px.end(), extra[k].begin(), extra[k].end());
    sort_pixels(px);
  }
  return result;
}

std::string leaves_to_csv(const std::vector<LeafSegment>& leaves, double gsd) {
  std::string out = "leaf_id,length_m,width_m,area_m2,n_slices\n";
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    const LeafMetrics m = leaf_metrics(leaves[k], gsd);
    out += std::to_string(k) + "," + csv::format(m.length) + "," + csv::format(m.width) + "," +
           csv::format(m.area) + "," + std::to_string(leaves[k].slices.size()) + "\n";
  }
  return out;
}

RasterImage leaf_overlay(const LeafMask& mask, const std::vector<LeafSegment>& leaves) {
  RasterImage img(std::max(1, mask.width()), std::max(1, mask.height()), 3);
  for (int i = 0; i < mask.height(); ++i) {
    for (int j = 0; j < mask.width(); ++j) {
      if (mask.at(i, j)) {
        for (int c = 0; c < 3; ++c) {
          img.at(i, j, c) = 60;
        }
      }
    }
  }
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    // Golden-angle hue walk gives well separated colors.
    const double hue = std::fmod(static_cast<double>(k) * 68.75, 180.0);
    std::uint8_t r, g, b;
    hsv_to_rgb(hue, 220.0, 240.0, r, g, b);
    for (const auto& p : leaves[k].pixels) {
      if (img.contains(p.i, p.j)) {
        img.at(p.i, p.j, 0) = r;
        img.at(p.i, p.j, 1) = g;
        img.at(p.i, p.j, 2) = b;
      }
    }
  }
  return img;
}

}  // namespace uavpheno
