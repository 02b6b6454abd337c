#pragma once

#include <optional>
#include <string>
#include <vector>

#include "apframe/ergodic.hpp"
#include "apframe/growth.hpp"
#include "apframe/process.hpp"
#include "apframe/spectral.hpp"
#include "apframe/wavelet.hpp"
#include "json.hpp"

namespace apframe {

/// F_alpha(lambda) = int |e^{ih lambda} - 1|^2 |h|^{-1-2 alpha} dh.
double f_alpha(double alpha, double lambda);
/// C_alpha = F_alpha(1).
double f_alpha_constant(double alpha);

/// Two-sided truncated integral 2 int_{eps0}^{window} g(h) h^{-1-2 alpha} dh,
/// split at h = 1 into a core ladder (eps halving) and a tail ladder
/// (window doubling).
struct SingularIntegral {
  double value = 0.0;
  double core = 0.0;
  double tail = 0.0;
  double eps0 = 0.0;
  double window = 0.0;
  GrowthDiagnostic core_diagnostic;
  GrowthDiagnostic tail_diagnostic;
  bool finite = true;
};

/// int_{eps0 <= |h| <= window} |R(0) - R(h)| |h|^{-1-2 alpha} dh.
SingularIntegral covariance_singular_integral(const Covariance& R, double alpha, double window = 65536.0,
                                              double eps0 = 0x1p-20);

struct SecondDifference {
  SingularIntegral integral;
  /// Largest relative gap between the spectral integrand int 16 sin^4(h lambda/2) d mu
  /// and 6 R(0) - 8 Re R(h) + 2 Re R(2h) over sampled h (represented measure).
  double identity_gap = 0.0;
};

/// int_{eps0 <= |h| <= window} E|X(t+h) + X(t-h) - 2X(t)|^2 |h|^{-1-2 alpha} dh.
SecondDifference second_difference_integral(const Covariance& R, double alpha, double window = 65536.0,
                                            double eps0 = 0x1p-20);

/// E|X(t+h) + X(t-h) - 2X(t)|^2 in the spectral form (atoms and represented density).
double second_difference_spectral(const SpectralMeasure& mu, double h);
/// The same through the covariance, 6 R(0) - 8 Re R(h) + 2 Re R(2h).
double second_difference_covariance(const Covariance& R, double h);

struct HypersingularTrace {
  std::vector<double> eps;
  std::vector<double> errors;
  double target_scale = 0.0;  // c(alpha)^2 * moment
  bool decreasing = true;
  bool converges = true;
};

/// E|D^alpha_eps X - c(alpha) D^alpha X|^2 = d^2 int |lambda|^{2 alpha} |K^(eps lambda) - 1|^2 d mu
/// over the represented measure, per eps; converges if the last value is
/// below tol * c(alpha)^2 * moment.
HypersingularTrace hypersingular_convergence(const SpectralMeasure& mu, double alpha,
                                             const std::vector<double>& eps_list, double tol = 1e-3);

enum class WeightStyle { Pure, Shifted };

double scale_weight(WeightStyle style, int a, int j, double alpha);

struct WeightedSum {
  double value = 0.0;     // Cesaro route over the realization
  std::optional<double> exact;     // Wiener value for discrete spectra (realized coefficients)
  double expected = 0.0;  // sum_j w(j) int |psi^(a^j lambda)|^2 d mu
  bool applicable = true;
  std::vector<std::string> warnings;
};

/// sum_{j in window} w(j) ||(<X, psi_{j,k}>)_k||^2_{B^2(K)} at horizon N.
WeightedSum weighted_ap_sum(const GaussianProcess& proc, const AffineSystem& sys, double alpha, WeightStyle style,
                            JRange j_window, int N);

/// Expected weighted sum ladder over increasing frequency scales a^k
/// (scales j >= -k), family-regenerated when the measure declares one.
GrowthDiagnostic weighted_sum_diagnostic(const SpectralMeasure& mu, const AffineSystem& sys, double alpha,
                                         WeightStyle style);

struct SmoothnessOptions {
  double window = 65536.0;
  double eps0 = 0x1p-20;
  std::vector<double> hypersingular_eps;  // empty skips the trace
  int a = 2;
};

struct Verdict {
  std::string name;
  bool applicable = true;
  bool finite = true;
};

struct SmoothnessReport {
  double alpha = 0.0;
  MomentResult moment;
  std::optional<SingularIntegral> cov_integral;
  std::optional<SecondDifference> second_difference;
  GrowthDiagnostic weighted_pure;
  GrowthDiagnostic weighted_shifted;
  std::optional<HypersingularTrace> hypersingular;
  double c_alpha = 0.0;
  std::vector<Verdict> verdicts;
  bool consistent = true;
  bool all_finite = true;
  std::string summary;
};

SmoothnessReport smoothness_verdict(const SpectralMeasure& mu, const AffineSystem& sys, double alpha,
                                    const SmoothnessOptions& opt = {});

nlohmann::json to_json(const GrowthDiagnostic& g);
nlohmann::json to_json(const SmoothnessReport& r);
std::string sweep_csv_header();
std::string sweep_csv_row(const SmoothnessReport& r);

}  // namespace apframe
