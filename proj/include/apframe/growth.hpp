#pragma once

#include <string>
#include <vector>

namespace apframe {

/// Finite-vs-divergent assessment of an improper integral from its partial
/// values over a geometric ladder of truncation bounds (bounds grow toward the
/// singular end; for a core diagnostic pass 1/eps).
///
/// `increment_slope` is the least-squares slope of log|P_{k+1} - P_k| against
/// log(bound_{k+1}) over the last `fit_points` increments; a power-law tail
/// with exponent s gives slope s, a logarithmic divergence slope 0. The
/// verdict is finite iff that slope is below `kFiniteIncrementSlope`, or the
/// increments have saturated at rounding level. `partial_slope` is the plain
/// log-log slope of the partial values themselves, kept for reporting.
struct GrowthDiagnostic {
  std::vector<double> bounds;
  std::vector<double> partials;
  double increment_slope = 0.0;
  double partial_slope = 0.0;
  bool saturated = false;
  bool finite = true;
};

inline constexpr double kFiniteIncrementSlope = -0.05;
inline constexpr int kGrowthFitPoints = 6;

GrowthDiagnostic assess_growth(std::vector<double> bounds, std::vector<double> partials,
                               int fit_points = kGrowthFitPoints);

/// Least-squares slope of y against x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

std::string verdict_label(bool finite);

}  // namespace apframe
