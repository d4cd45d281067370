#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "uavpheno/localization.hpp"

namespace uavpheno {

struct LocalizationScore {
  double mean_error = 0.0;  // px
  double max_error = 0.0;   // px
  /// (estimate index, truth index), sorted by estimate index.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// One-to-one matching of estimates to truth minimising total Euclidean
/// distance: exact (Hungarian) up to `exact_limit` plants, greedy on sorted
/// distances above. Throws InputError when the counts differ or are zero.
LocalizationScore score_localization(const PlantConfiguration& estimate,
                                     const PlantConfiguration& truth,
                                     std::size_t exact_limit = 64);

/// Minimum-cost perfect assignment for a square cost matrix (row-major,
/// n x n). Returns the column assigned to each row.
std::vector<std::size_t> hungarian(const std::vector<double>& cost, std::size_t n);

}  // namespace uavpheno
