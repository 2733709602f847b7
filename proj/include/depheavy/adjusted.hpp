#pragma once

// Rank-oriented adjustments of heaviness metrics. Adjusted values are only
// meaningful for ordering packages, not as absolute quantities.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace depheavy {

struct AdjustmentConfig {
  double mhp_offset = 30;  // added to the parent count in the MHP zoom factor
  int hc_penalty = 10;
  int hid_penalty = 6;
  std::size_t rank_window = 50;
  double plateau_epsilon = 0.002;
};

/// h_max * (n_k + offset) / n_max. DomainError when n_max == 0.
double adjusted_mhp(std::int64_t h_max, std::int64_t n_k, std::int64_t n_max, double offset = 30);

/// h * k / (k + a); 0 when k == 0. DomainError when a <= 0.
double adjusted_penalized(double h, std::int64_t k, int a);

struct StabilityCurve {
  std::vector<int> a_values;
  /// s_values[i] belongs to a_values[i]; absent for the first a.
  std::vector<std::optional<double>> s_values;
  std::size_t rank_window = 50;
};

/// For each a in [a_min, a_max], ranks packages by
/// adjusted_penalized(metric, k, a) descending (ties by name, ranks
/// 1..N) and records the fraction whose rank moved by at most `window`
/// relative to a - 1. DomainError on empty or mismatched input.
StabilityCurve stability_curve(const std::map<std::string, double>& metric_by_package,
                               const std::map<std::string, std::int64_t>& k_by_package,
                               int a_min = 1, int a_max = 30, std::size_t window = 50);

struct PenaltySelection {
  int a = 0;
  bool plateau_found = false;
};

/// Smallest a (with a defined successor) such that every later step of the
/// curve rises by less than epsilon. Falls back to `fallback` when the
/// curve never flattens.
PenaltySelection select_penalty(const StabilityCurve& curve, int fallback, double epsilon = 0.002);

}  // namespace depheavy
