#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace taskprob {

/// Uniform-bin histogram. Values outside [lo, hi] are clamped into the edge
/// bins and counted in `clamped`; a value equal to `hi` lands in the last bin.
struct Histogram {
  std::vector<double> edges;         // bins + 1, strictly increasing
  std::vector<std::size_t> counts;   // per bin
  std::size_t total = 0;
  std::size_t clamped = 0;
  double mean = 0.0;                 // of the unclamped input values
  double mean_abs = 0.0;
};

/// Throws std::invalid_argument unless bins >= 1 and lo < hi.
Histogram make_histogram(std::span<const double> values, double lo, double hi,
                         std::size_t bins);

/// Sample Pearson coefficient; nullopt when either series has zero variance.
/// Throws std::invalid_argument on unequal lengths or fewer than two points.
std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys);

/// Pearson over mid-ranks (ties share the average rank).
std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys);

/// Mid-ranks starting at 1.
std::vector<double> ranks(std::span<const double> values);

}  // namespace taskprob
