#pragma once

// Least-squares distribution fits in log space.
//
//   stretched exponential:  log p(h) = log c - lambda * h^beta
//   power law:              log f(s) = log scale - exponent * log s
//
// Histogram values are fitted as given: pass relative frequencies to fit a
// probability mass function.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace depheavy {

struct FitResult {
  enum class Family { StretchedExponential, PowerLaw };
  Family family = Family::StretchedExponential;

  // StretchedExponential
  double c = 0, lambda = 0, beta = 0;
  // PowerLaw
  double exponent = 0, scale = 0;

  double r_squared = 0;         // on the log scale
  double residual = 0;          // sum of squared log residuals
  std::size_t points_used = 0;
  std::size_t points_dropped = 0;

  double predict(double x) const;
};

/// Grid search over beta in [0.05, 1.5] (step 0.01) with closed-form
/// regression of log p on h^beta at each point, then golden-section
/// refinement around the best grid beta. Zero-frequency bins are dropped.
/// DomainError with fewer than 3 usable points.
FitResult fit_stretched_exponential(const std::map<std::int64_t, double>& histogram);

/// Sum of squared log residuals of the best (c, lambda) for a fixed beta.
double stretched_exponential_residual(const std::map<std::int64_t, double>& histogram,
                                      double beta);

/// Regression of log frequency on log size over the size histogram, after
/// dropping the `drop_top` largest distinct sizes. DomainError with fewer
/// than 3 distinct sizes left.
FitResult fit_power_law(std::span<const std::int64_t> sizes, std::size_t drop_top = 5);

/// Same, on an explicit size -> frequency histogram.
FitResult fit_power_law_histogram(const std::map<std::int64_t, double>& histogram,
                                  std::size_t drop_top = 5);

}  // namespace depheavy
