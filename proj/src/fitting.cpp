#include "depheavy/fitting.hpp"

#include <cmath>
#include <limits>

#include "depheavy/error.hpp"

namespace depheavy {

namespace {

struct LineFit {
  double intercept = 0, slope = 0, sse = 0, sst = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.sse += r * r;
  }
  f.sst = syy;
  return f;
}

double r_squared(const LineFit& f) { return f.sst > 0 ? 1.0 - f.sse / f.sst : 1.0; }

struct SePoints {
  std::vector<double> h, log_p;
  std::size_t dropped = 0;
};

SePoints se_points(const std::map<std::int64_t, double>& histogram) {
  SePoints pts;
  for (const auto& [h, p] : histogram) {
    if (h < 0) throw DomainError("stretched exponential support must be non-negative");
    if (!(p > 0)) {
      ++pts.dropped;
      continue;
    }
    pts.h.push_back(static_cast<double>(h));
    pts.log_p.push_back(std::log(p));
  }
  if (pts.h.size() < 3)
    throw DomainError("stretched exponential fit needs at least 3 points with nonzero frequency");
  return pts;
}

LineFit se_line(const SePoints& pts, double beta) {
  std::vector<double> x(pts.h.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::pow(pts.h[i], beta);
  return fit_line(x, pts.log_p);
}

}  // namespace

double FitResult::predict(double x) const {
  if (family == Family::StretchedExponential) return c * std::exp(-lambda * std::pow(x, beta));
  return scale * std::pow(x, -exponent);
}

double stretched_exponential_residual(const std::map<std::int64_t, double>& histogram,
                                      double beta) {
  return se_line(se_points(histogram), beta).sse;
}

FitResult fit_stretched_exponential(const std::map<std::int64_t, double>& histogram) {
  const auto pts = se_points(histogram);

  double best_beta = 0.05;
  LineFit best = se_line(pts, best_beta);
  for (int step = 1; step <= 145; ++step) {
    const double beta = 0.05 + 0.01 * step;
    const auto f = se_line(pts, beta);
    if (f.sse < best.sse) {
      best = f;
      best_beta = beta;
    }
  }

  // Golden-section search on [beta - 0.01, beta + 0.01], kept only if it
  // improves on the grid.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::max(0.05, best_beta - 0.01), hi = std::min(1.5, best_beta + 0.01);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = se_line(pts, x1).sse, f2 = se_line(pts, x2).sse;
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = se_line(pts, x1).sse;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = se_line(pts, x2).sse;
    }
  }
  const double refined = (lo + hi) / 2.0;
  const auto rf = se_line(pts, refined);
  if (rf.sse < best.sse) {
    best = rf;
    best_beta = refined;
  }

  FitResult out;
  out.family = FitResult::Family::StretchedExponential;
  out.beta = best_beta;
  out.c = std::exp(best.intercept);
  out.lambda = -best.slope;
  out.residual = best.sse;
  out.r_squared = r_squared(best);
  out.points_used = pts.h.size();
  out.points_dropped = pts.dropped;
  return out;
}

FitResult fit_power_law_histogram(const std::map<std::int64_t, double>& histogram,
                                  std::size_t drop_top) {
  std::vector<double> x, y;
  std::size_t dropped = 0;
  const std::size_t keep = histogram.size() > drop_top ? histogram.size() - drop_top : 0;
  std::size_t index = 0;
  for (const auto& [s, f] : histogram) {
    const bool in_top = index++ >= keep;
    if (in_top || s <= 0 || !(f > 0)) {
      ++dropped;
      continue;
    }
    x.push_back(std::log(static_cast<double>(s)));
    y.push_back(std::log(f));
  }
  if (x.size() < 3) throw DomainError("power-law fit needs at least 3 distinct sizes");
  const auto line = fit_line(x, y);
  FitResult out;
  out.family = FitResult::Family::PowerLaw;
  out.exponent = -line.slope;
  out.scale = std::exp(line.intercept);
  out.residual = line.sse;
  out.r_squared = r_squared(line);
  out.points_used = x.size();
  out.points_dropped = dropped;
  return out;
}

FitResult fit_power_law(std::span<const std::int64_t> sizes, std::size_t drop_top) {
  std::map<std::int64_t, double> histogram;
  for (auto s : sizes) histogram[s] += 1.0;
  return fit_power_law_histogram(histogram, drop_top);
}

}  // namespace depheavy
