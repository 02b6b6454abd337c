#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apframe/spectral.hpp"
#include "json.hpp"

namespace apframe {

/// psi^ vanishes off lo <= |lambda| <= hi.
struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

/// Declared decay |psi^(lambda)| <= C min(|lambda|^q, |lambda|^{-p}).
struct DecayCertificate {
  double constant = 1.0;
  double p = 1.0;
  double q = 1.0;
};

class MotherWavelet {
 public:
  using Evaluator = std::function<Complex(double)>;

  MotherWavelet(std::string name, Evaluator psi_hat, std::optional<Band> band = std::nullopt,
                std::optional<double> c1_bound = std::nullopt,
                std::optional<DecayCertificate> decay = std::nullopt);

  /// Indicator of [lo, hi) u [-hi, -lo): the two half-open halves are
  /// translates of each other, so dyadic and lattice coverings count each
  /// point exactly once.
  static MotherWavelet shannon(double lo = 3.14159265358979323846,
                               double hi = 6.28318530717958647692);
  /// Meyer wavelet, band (2 pi/3, 8 pi/3), nu(x) = x^4 (35 - 84x + 70x^2 - 20x^3).
  static MotherWavelet meyer();
  /// Piecewise-linear interpolation of tabulated values on a sorted grid.
  static MotherWavelet tabulated(std::vector<double> grid, std::vector<Complex> values,
                                 std::optional<Band> band = std::nullopt);
  static MotherWavelet zero();

  Complex operator()(double lambda) const;
  const std::string& name() const { return name_; }
  const std::optional<Band>& band() const { return band_; }
  const std::optional<double>& c1_bound() const { return c1_bound_; }
  const std::optional<DecayCertificate>& decay() const { return decay_; }
  bool band_limited() const { return band_.has_value(); }

  /// Multiplies psi^ by c (bounds scale by |c|^2).
  MotherWavelet scaled(Complex c) const;
  MotherWavelet with_decay(DecayCertificate cert) const;

 private:
  std::string name_;
  Evaluator psi_hat_;
  std::optional<Band> band_;
  std::optional<double> c1_bound_;
  std::optional<DecayCertificate> decay_;
};

/// (psi, a, b); K = bZ, D = (2 pi / b) Z.
struct AffineSystem {
  MotherWavelet wavelet;
  int a = 2;
  double b = 1.0;

  AffineSystem(MotherWavelet w, int a_, double b_);
  double dual_step() const;
  /// a^j as a double (exact for the powers used).
  double scale(int j) const;
};

enum class Normalization { L1, L2 };

/// psi^(a^j lambda) e^{-i k a^j lambda}, times a^{j/2} in L2 mode; k must lie in bZ.
Complex psi_jk_hat(const AffineSystem& sys, int j, double k, double lambda,
                   Normalization norm = Normalization::L1);

/// |lambda|^{-alpha} psi^(lambda), zero at lambda = 0.
MotherWavelet riesz_potential(const MotherWavelet& w, double alpha);

/// gamma(alpha) = pi^{1/2} 2^alpha Gamma(alpha/2) / Gamma((1 - alpha)/2).
double gamma_constant(double alpha);

struct JRange {
  int lo = 0;
  int hi = -1;
};

/// Scales j with the band of psi^(a^j .) possibly containing lambda.
JRange active_scales(const AffineSystem& sys, double lambda);

struct LittlewoodPaley {
  double value = 0.0;
  double tail_bound = 0.0;
  JRange range;
};

/// sum_j |psi^(a^j lambda)|^2 over the exact band window, or over `range`
/// with a tail bound from the decay certificate for non-band-limited wavelets.
LittlewoodPaley littlewood_paley(const AffineSystem& sys, double lambda,
                                 std::optional<JRange> range = std::nullopt);

struct C1Supremum {
  double value = 0.0;
  double argmax = 0.0;
  std::optional<bool> within_bound;
};

/// Supremum over midpoint samples of [0, 2 pi/b) of sum_{d in D} |psi^(a^j(lambda + d))|^2.
C1Supremum c1_supremum(const AffineSystem& sys, int j, int grid_points,
                       std::optional<std::pair<int, int>> d_range = std::nullopt);

/// Builds a wavelet from config: {"name": "shannon"|"meyer"|"tabulated", ...}.
MotherWavelet wavelet_from_json(const nlohmann::json& j);

}  // namespace apframe
