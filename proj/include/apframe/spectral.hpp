#pragma once

#include <Eigen/Core>

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apframe/growth.hpp"
#include "apframe/quadrature.hpp"
#include "json.hpp"

namespace apframe {

using Complex = std::complex<double>;

/// Frequency response lambda -> f(lambda) of a linear time-invariant filter.
using FrequencyResponse = std::function<Complex(double)>;

struct SpectralAtom {
  double lambda = 0.0;
  double mass = 0.0;
};

/// Nonnegative density tabulated on a uniform grid; linear interpolation
/// between nodes, zero outside [grid_min, grid_max].
struct DensityGrid {
  double grid_min = 0.0;
  double grid_max = 0.0;
  Eigen::VectorXd values;

  Eigen::Index nodes() const { return values.size(); }
  double step() const { return (grid_max - grid_min) / static_cast<double>(values.size() - 1); }
  double node(Eigen::Index i) const { return grid_min + static_cast<double>(i) * step(); }
  double evaluate(double lambda) const;
  /// Trapezoid mass, equal to the exact integral of the interpolant.
  double mass() const;
  /// Exact integral of the interpolant over [a, b].
  double integral(double a, double b) const;
};

/// Parametric density families that can be re-tabulated at any bound.
///
/// Matern: mass * c_beta * (1 + lambda^2)^{-beta}, beta > 1/2, normalized to
/// total mass `mass`. Band: uniform density of total mass `mass` on
/// lo <= |lambda| <= hi.
struct DensityFamily {
  enum class Kind { Matern, Band };
  Kind kind = Kind::Matern;
  double beta = 1.0;
  double lo = 0.0;
  double hi = 1.0;
  double mass = 1.0;

  static DensityFamily matern(double beta, double mass = 1.0);
  static DensityFamily band(double lo, double hi, double mass = 1.0);

  double density(double lambda) const;
  /// Exact covariance of the untruncated family.
  Complex covariance(double tau) const;
  /// Largest |lambda| with positive density (+inf for Matern).
  double support_max() const;
  /// Points where the density is not smooth (positive half-line).
  std::vector<double> breakpoints() const;
  std::string name() const;
  DensityGrid tabulate(double grid_max, Eigen::Index nodes) const;
};

/// Finite Borel measure on the real line: finitely many atoms plus a
/// tabulated density. Immutable after construction.
class SpectralMeasure {
 public:
  SpectralMeasure() = default;
  SpectralMeasure(std::vector<SpectralAtom> atoms, std::optional<DensityGrid> density,
                  bool symmetric = false, std::optional<DensityFamily> family = std::nullopt);

  /// Tabulates `family` on [-grid_max, grid_max] and adds optional atoms.
  static SpectralMeasure from_family(const DensityFamily& family, double grid_max,
                                     Eigen::Index nodes, std::vector<SpectralAtom> atoms = {});

  const std::vector<SpectralAtom>& atoms() const { return atoms_; }
  const std::optional<DensityGrid>& density() const { return density_; }
  const std::optional<DensityFamily>& family() const { return family_; }
  bool declared_symmetric() const { return symmetric_; }
  double total_mass() const { return total_mass_; }
  double atom_mass() const;
  double density_mass() const;
  /// Largest |lambda| carrying mass in the represented measure.
  double support_max() const;
  /// Truncation bound of the represented density (0 without density).
  double truncation_bound() const;
  bool has_atom_at(double lambda) const;

 private:
  std::vector<SpectralAtom> atoms_;
  std::optional<DensityGrid> density_;
  std::optional<DensityFamily> family_;
  bool symmetric_ = false;
  double total_mass_ = 0.0;
};

struct Decomposition {
  SpectralMeasure continuous;
  SpectralMeasure discrete;
};

struct MomentResult {
  double value = 0.0;  // over the represented support
  GrowthDiagnostic diagnostic;
};

/// R(tau) = sum_atoms m e^{i lambda tau} + int e^{i lambda tau} rho(lambda) d lambda,
/// the density part integrated exactly over its piecewise-linear interpolant.
Complex covariance(const SpectralMeasure& mu, double tau);

/// Fourier transform of the piecewise-linear density interpolant at tau.
Complex density_covariance(const DensityGrid& g, double tau);

/// int |lambda|^{2 alpha} d mu over the represented support, with a growth
/// diagnostic over increasing bounds (family-regenerated when declared).
MomentResult spectral_moment(const SpectralMeasure& mu, double alpha);

/// Partial moment int_{|lambda| <= bound} |lambda|^{2 alpha} d mu of the
/// represented measure.
double truncated_moment(const SpectralMeasure& mu, double alpha, double bound);

/// Partial moment of a declared family on |lambda| <= bound.
double family_moment(const DensityFamily& family, double alpha, double bound);

Decomposition decompose(const SpectralMeasure& mu);

/// Atom masses and density values scaled by |f|^2. Throws std::domain_error
/// if f is non-finite at an atom or grid node.
SpectralMeasure filter_measure(const SpectralMeasure& mu, const FrequencyResponse& f);

/// Indicator of the complement of the atom locations (the carrier of the
/// continuous part).
FrequencyResponse continuous_carrier(const SpectralMeasure& mu);

/// Covariance evaluator bound to its source measure. When the measure
/// declares a parametric family the exact family covariance is used for the
/// continuous part; otherwise the represented density.
class Covariance {
 public:
  explicit Covariance(SpectralMeasure mu, bool prefer_family = true);

  Complex operator()(double tau) const;
  /// R(0) - R(tau), with the atom part summed as m (2 sin^2(lambda tau/2) - i sin(lambda tau)).
  /// Small lags of a compactly supported density use its moment series.
  Complex increment(double tau) const;
  /// int 16 sin^4(h lambda/2) d mu = 6 R(0) - 8 Re R(h) + 2 Re R(2h), evaluated
  /// without the cancellation of the right-hand side where possible.
  double second_difference(double h) const;
  double at_zero() const { return r0_; }
  const SpectralMeasure& source() const { return mu_; }
  bool uses_family() const { return use_family_; }

 private:
  SpectralMeasure mu_;
  bool use_family_ = false;
  double r0_ = 0.0;
  // Even moments of the non-atomic part when it has compact support.
  std::vector<double> even_moments_;
  double reach_ = 0.0;

  Complex smooth_increment(double tau) const;
};

/// int f(lambda) rho(lambda) d lambda over the represented density, one
/// 21-point Gauss-Kronrod rule per grid cell, cells split at `breaks`.
template <class Scalar, class F>
Scalar integrate_density(const DensityGrid& grid, const F& f, std::vector<double> breaks = {});

/// int_lo^hi f(lambda) rho_family(lambda) d lambda by adaptive quadrature,
/// split at dyadic points and the family's breakpoints.
template <class Scalar, class F>
Scalar integrate_family(const DensityFamily& family, const F& f, double lo, double hi);

void to_json(nlohmann::json& j, const SpectralMeasure& mu);
SpectralMeasure measure_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const DensityFamily& fam);
DensityFamily family_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------

template <class Scalar, class F>
Scalar integrate_density(const DensityGrid& grid, const F& f, std::vector<double> breaks) {
  std::sort(breaks.begin(), breaks.end());
  Scalar total{};
  const double h = grid.step();
  auto piece = [&](double a, double b) {
    auto integrand = [&](double x) -> Scalar { return f(x) * grid.evaluate(x); };
    return quad::detail::gk21<Scalar>(integrand, a, b).value;
  };
  auto it = breaks.begin();
  for (Eigen::Index i = 0; i + 1 < grid.nodes(); ++i) {
    if (grid.values[i] == 0.0 && grid.values[i + 1] == 0.0) continue;
    double a = grid.node(i);
    const double b = grid.node(i + 1);
    while (it != breaks.end() && *it <= a) ++it;
    for (auto jt = it; jt != breaks.end() && *jt < b; ++jt) {
      total += piece(a, *jt);
      a = *jt;
    }
    total += piece(a, b);
  }
  (void)h;
  return total;
}

template <class Scalar, class F>
Scalar integrate_family(const DensityFamily& family, const F& f, double lo, double hi) {
  std::vector<double> breaks{lo};
  std::vector<double> marks = family.breakpoints();
  for (double m : marks) {
    if (m > lo && m < hi) breaks.push_back(m);
    if (-m > lo && -m < hi) breaks.push_back(-m);
  }
  // Dyadic split points in |lambda| keep panels scale-appropriate on long ranges.
  for (double x = 1.0; x < std::max(std::abs(lo), std::abs(hi)); x *= 2.0) {
    if (x > lo && x < hi) breaks.push_back(x);
    if (-x > lo && -x < hi) breaks.push_back(-x);
  }
  if (lo < 0.0 && hi > 0.0) breaks.push_back(0.0);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  auto integrand = [&](double x) -> Scalar { return f(x) * family.density(x); };
  quad::Options opt;
  opt.abs_tol = 1e-15;
  opt.rel_tol = 1e-11;
  return quad::gauss_kronrod_pieces<Scalar>(integrand, breaks, opt).value;
}

}  // namespace apframe
