#include "uavpheno/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "uavpheno/error.hpp"

namespace uavpheno {

std::vector<std::size_t> hungarian(const std::vector<double>& cost, std::size_t n) {
  if (cost.size() != n * n) {
    throw InputError("cost matrix must be n x n");
  }
  // Shortest augmenting path with potentials; rows and columns are 1-based
  // inside, column 0 is the virtual source.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t r0 = match[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) {
          continue;
        }
        const double cur = cost[(r0 - 1) * n + (c - 1)] - u[r0] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> assignment(n, 0);
  for (std::size_t c = 1; c <= n; ++c) {
    assignment[match[c] - 1] = c - 1;
  }
  return assignment;
}

LocalizationScore score_localization(const PlantConfiguration& estimate,
                                     const PlantConfiguration& truth, std::size_t exact_limit) {
  if (estimate.size() != truth.size()) {
    throw InputError("estimate has " + std::to_string(estimate.size()) + " plants, truth has " +
                     std::to_string(truth.size()));
  }
  const std::size_t n = truth.size();
  if (n == 0) {
    throw InputError("nothing to score");
  }
  std::vector<double> dist(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      dist[a * n + b] = std::hypot(estimate[a].i - truth[b].i, estimate[a].j - truth[b].j);
    }
  }
  LocalizationScore s;
  if (n <= exact_limit) {
    const auto cols = hungarian(dist, n);
    for (std::size_t a = 0; a < n; ++a) {
      s.pairs.emplace_back(a, cols[a]);
    }
  } else {
    std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
    edges.reserve(n * n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        edges.emplace_back(dist[a * n + b], a, b);
      }
    }
    std::sort(edges.begin(), edges.end());
    std::vector<char> used_a(n, 0), used_b(n, 0);
    for (const auto& [d, a, b] : edges) {
      if (!used_a[a] && !used_b[b]) {
        used_a[a] = used_b[b] = 1;
        s.pairs.emplace_back(a, b);
      }
    }
    std::sort(s.pairs.begin(), s.pairs.end());
  }
  double sum = 0.0;
  for (const auto& [a, b] : s.pairs) {
    const double d = dist[a * n + b];
    sum += d;
    s.max_error = std::max(s.max_error, d);
  }
  s.mean_error = sum / static_cast<double>(n);
  return s;
}

}  // namespace uavpheno
