#include "apframe/growth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace apframe {

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("least_squares_slope: need two or more paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

GrowthDiagnostic assess_growth(std::vector<double> bounds, std::vector<double> partials,
                               int fit_points) {
  if (bounds.size() != partials.size() || bounds.size() < 3) {
    throw std::invalid_argument("assess_growth: need at least three ladder points");
  }
  GrowthDiagnostic g;
  g.bounds = std::move(bounds);
  g.partials = std::move(partials);
  const std::size_t n = g.bounds.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(fit_points), n - 1);

  const double scale = std::max(std::abs(g.partials.back()), 1e-300);
  std::vector<double> lx, ly;
  bool all_tiny = true;
  for (std::size_t i = n - k; i < n; ++i) {
    const double inc = std::abs(g.partials[i] - g.partials[i - 1]);
    if (inc > 1e-13 * scale && inc > 1e-300) all_tiny = false;
    lx.push_back(std::log(g.bounds[i]));
    ly.push_back(std::log(std::max(inc, 1e-300)));
  }
  g.saturated = all_tiny;
  g.increment_slope = least_squares_slope(lx, ly);

  std::vector<double> px, py;
  for (std::size_t i = n - k - 1; i < n; ++i) {
    if (g.partials[i] > 0.0) {
      px.push_back(std::log(g.bounds[i]));
      py.push_back(std::log(g.partials[i]));
    }
  }
  g.partial_slope = px.size() >= 2 ? least_squares_slope(px, py) : 0.0;
  g.finite = g.saturated || g.increment_slope < kFiniteIncrementSlope;
  return g;
}

std::string verdict_label(bool finite) { return finite ? "finite" : "divergent"; }

}  // namespace apframe
