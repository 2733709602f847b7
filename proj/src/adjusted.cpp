#include "depheavy/adjusted.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "depheavy/error.hpp"

namespace depheavy {

double adjusted_mhp(std::int64_t h_max, std::int64_t n_k, std::int64_t n_max, double offset) {
  if (n_max <= 0) throw DomainError("adjusted MHP needs a positive maximum parent count");
  return static_cast<double>(h_max) * (static_cast<double>(n_k) + offset) /
         static_cast<double>(n_max);
}

double adjusted_penalized(double h, std::int64_t k, int a) {
  if (a <= 0) throw DomainError("penalty must be a positive integer");
  if (k == 0) return 0.0;
  const auto kd = static_cast<double>(k);
  return h * kd / (kd + a);
}

namespace {

// rank[i] (1-based) of package i when ordered by value descending; the
// input order is name order, which breaks ties.
std::vector<std::size_t> ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<std::size_t> rank(values.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos + 1;
  return rank;
}

}  // namespace

StabilityCurve stability_curve(const std::map<std::string, double>& metric_by_package,
                               const std::map<std::string, std::int64_t>& k_by_package,
                               int a_min, int a_max, std::size_t window) {
  if (metric_by_package.empty()) throw DomainError("stability curve of an empty population");
  if (metric_by_package.size() != k_by_package.size())
    throw DomainError("metric and count maps must share keys");
  if (a_min < 1 || a_max < a_min) throw DomainError("invalid penalty range");

  std::vector<double> h;
  std::vector<std::int64_t> k;
  for (const auto& [name, value] : metric_by_package) {
    auto it = k_by_package.find(name);
    if (it == k_by_package.end()) throw DomainError("no count for package '" + name + "'");
    h.push_back(value);
    k.push_back(it->second);
  }

  StabilityCurve curve;
  curve.rank_window = window;
  std::vector<std::size_t> previous;
  std::vector<double> adjusted(h.size());
  for (int a = a_min; a <= a_max; ++a) {
    for (std::size_t i = 0; i < h.size(); ++i) adjusted[i] = adjusted_penalized(h[i], k[i], a);
    auto current = ranks(adjusted);
    curve.a_values.push_back(a);
    if (previous.empty()) {
      curve.s_values.push_back(std::nullopt);
    } else {
      std::size_t stable = 0;
      for (std::size_t i = 0; i < current.size(); ++i) {
        const auto diff = current[i] > previous[i] ? current[i] - previous[i] : previous[i] - current[i];
        if (diff <= window) ++stable;
      }
      curve.s_values.push_back(static_cast<double>(stable) / static_cast<double>(current.size()));
    }
    previous = std::move(current);
  }
  return curve;
}

PenaltySelection select_penalty(const StabilityCurve& curve, int fallback, double epsilon) {
  // Indices with a defined s value, in order.
  std::vector<std::size_t> defined;
  for (std::size_t i = 0; i < curve.s_values.size(); ++i)
    if (curve.s_values[i]) defined.push_back(i);
  if (defined.size() < 2) return {fallback, false};

  // Walk backwards while the remaining increments stay under epsilon.
  std::size_t onset = defined.size();
  for (std::size_t j = defined.size() - 1; j-- > 0;) {
    const double step = *curve.s_values[defined[j + 1]] - *curve.s_values[defined[j]];
    if (step < epsilon)
      onset = j;
    else
      break;
  }
  if (onset == defined.size()) return {fallback, false};
  return {curve.a_values[defined[onset]], true};
}

}  // namespace depheavy
