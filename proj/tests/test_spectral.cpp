#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <numbers>

#include "apframe/spectral.hpp"

using namespace apframe;

namespace {
constexpr double kPi = std::numbers::pi;

SpectralMeasure two_atoms(double lam = 1.0, double m = 0.5) {
  return SpectralMeasure({{-lam, m}, {lam, m}}, std::nullopt, true);
}

DensityGrid ramp_grid() {
  DensityGrid g;
  g.grid_min = -1.0;
  g.grid_max = 3.0;
  g.values = Eigen::VectorXd::LinSpaced(9, 0.2, 1.0);
  return g;
}

// Oracle: Boost Gauss-Kronrod over each cell of the linear interpolant.
Complex interpolant_transform(const DensityGrid& g, double tau) {
  double re = 0.0, im = 0.0;
  for (Eigen::Index i = 0; i + 1 < g.nodes(); ++i) {
    auto fr = [&](double x) { return g.evaluate(x) * std::cos(tau * x); };
    auto fi = [&](double x) { return g.evaluate(x) * std::sin(tau * x); };
    re += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(fr, g.node(i), g.node(i + 1), 10, 1e-15);
    im += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(fi, g.node(i), g.node(i + 1), 10, 1e-15);
  }
  return {re, im};
}
}  // namespace

TEST(SpectralMeasure, ValidatesInput) {
  EXPECT_THROW(SpectralMeasure({{1.0, -0.1}}, std::nullopt), std::invalid_argument);
  EXPECT_THROW(SpectralMeasure({{1.0, 0.1}, {1.0, 0.2}}, std::nullopt), std::invalid_argument);
  EXPECT_THROW(SpectralMeasure({{1.0, 0.1}}, std::nullopt, true), std::invalid_argument);
  DensityGrid bad = ramp_grid();
  bad.values[3] = -1.0;
  EXPECT_THROW(SpectralMeasure({}, bad), std::invalid_argument);
  EXPECT_THROW(SpectralMeasure({}, ramp_grid(), true), std::invalid_argument);
  EXPECT_THROW(DensityFamily::matern(0.5), std::invalid_argument);
}

TEST(SpectralMeasure, MassesAndSupport) {
  SpectralMeasure mu({{2.0, 0.3}, {-1.0, 0.1}}, ramp_grid());
  EXPECT_NEAR(mu.atom_mass(), 0.4, 1e-15);
  EXPECT_NEAR(mu.density_mass(), 0.5 * (0.2 + 1.0) * 4.0, 1e-14);
  EXPECT_NEAR(mu.total_mass(), covariance(mu, 0.0).real(), 1e-14);
  EXPECT_DOUBLE_EQ(mu.support_max(), 3.0);
  EXPECT_TRUE(mu.has_atom_at(-1.0));
  EXPECT_EQ(mu.atoms().front().lambda, -1.0);
}

TEST(Covariance, AtomsGiveTrigonometricPolynomial) {
  const auto mu = two_atoms(1.3, 0.5);
  for (double t : {0.0, 0.4, 7.0}) EXPECT_NEAR(covariance(mu, t).real(), std::cos(1.3 * t), 1e-15);
}

TEST(Covariance, DensityIsExactTransformOfInterpolant) {
  const auto g = ramp_grid();
  for (double t : {0.0, 1e-4, 0.3, 2.0, 25.0}) {
    const Complex ref = interpolant_transform(g, t);
    const Complex got = density_covariance(g, t);
    EXPECT_NEAR(got.real(), ref.real(), 1e-12) << t;
    EXPECT_NEAR(got.imag(), ref.imag(), 1e-12) << t;
  }
}

TEST(Covariance, IsPositiveDefinite) {
  SpectralMeasure mu({{0.7, 0.2}}, ramp_grid());
  const int n = 12;
  Eigen::MatrixXcd K(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) K(i, j) = covariance(mu, 0.37 * (i - j));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(K);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
  // Hermitian: R(-t) = conj R(t)
  EXPECT_NEAR(std::abs(covariance(mu, -1.1) - std::conj(covariance(mu, 1.1))), 0.0, 1e-14);
}

TEST(DensityFamily, BandCovarianceClosedForm) {
  const auto f = DensityFamily::band(0.5, 2.5, 0.8);
  for (double t : {0.5, 3.0}) {
    EXPECT_NEAR(f.covariance(t).real(), 0.8 * (std::sin(2.5 * t) - std::sin(0.5 * t)) / (2.0 * t), 1e-15);
  }
}

TEST(DensityFamily, MaternCovarianceMatchesFourierOracle) {
  for (double beta : {0.75, 1.0, 1.5, 2.5}) {
    const auto f = DensityFamily::matern(beta, 1.0);
    auto rho = [&](double x) { return 2.0 * f.density(x); };
    boost::math::quadrature::ooura_fourier_cos<double> oc;
    for (double t : {0.5, 1.0, 4.0}) {
      const double ref = oc.integrate(rho, t).first;
      EXPECT_NEAR(f.covariance(t).real(), ref, 1e-8) << beta << " " << t;
    }
    EXPECT_NEAR(f.covariance(0.0).real(), 1.0, 1e-15);
    boost::math::quadrature::exp_sinh<double> es;
    const double mass = 2.0 * es.integrate([&](double x) { return f.density(x); }, 0.0, INFINITY);
    EXPECT_NEAR(mass, 1.0, 1e-9) << beta;
  }
}

TEST(Covariance, IncrementIsStableForSmallLags) {
  const auto mu = two_atoms(2.0, 0.5);
  const Covariance R(mu);
  const double t = 1e-9;
  // 1 - cos(2t) = 2 sin^2(t)
  EXPECT_NEAR(R.increment(t).real() / (2.0 * std::sin(t) * std::sin(t)), 1.0, 1e-12);
  EXPECT_NEAR(R.increment(0.5).real(), 1.0 - std::cos(1.0), 1e-15);
}

TEST(Covariance, FamilyPreferredOverTable) {
  const auto mu = SpectralMeasure::from_family(DensityFamily::matern(2.0), 16.0, 513);
  const Covariance exact(mu, true), table(mu, false);
  EXPECT_TRUE(exact.uses_family());
  EXPECT_FALSE(table.uses_family());
  // R(t) = (1 + t) e^{-t} for beta = 2
  EXPECT_NEAR(exact(0.8).real(), 1.8 * std::exp(-0.8), 1e-14);
  EXPECT_NEAR(table(0.8).real(), exact(0.8).real(), 5e-3);
}

TEST(Moments, UniformBandClosedForm) {
  const auto fam = DensityFamily::band(0.5, 1.5, 1.0);
  DensityGrid g;
  g.grid_min = -1.5;
  g.grid_max = 1.5;
  g.values.resize(3001);
  for (Eigen::Index i = 0; i < 3001; ++i) g.values[i] = fam.density(g.node(i));
  SpectralMeasure mu({}, g, true);
  const double p = 1.0;  // alpha = 1/2
  const double exact = (std::pow(1.5, p + 1) - std::pow(0.5, p + 1)) / ((p + 1) * 1.0);
  EXPECT_NEAR(truncated_moment(mu, 0.5, INFINITY), exact, 2e-3);
  EXPECT_NEAR(family_moment(fam, 0.5, 10.0), exact, 1e-12);
  EXPECT_NEAR(truncated_moment(two_atoms(2.0, 0.5), 0.25, INFINITY), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(truncated_moment(two_atoms(2.0, 0.5), 0.25, 1.0), 0.0);
}

TEST(Moments, PiecewiseLinearMomentMatchesQuadrature) {
  const auto g = ramp_grid();
  SpectralMeasure mu({}, g);
  for (double a : {0.2, 0.5, 0.9}) {
    double ref = 0.0;
    for (Eigen::Index i = 0; i + 1 < g.nodes(); ++i) {
      double lo = g.node(i), hi = g.node(i + 1);
      auto f = [&](double x) { return std::pow(std::abs(x), 2 * a) * g.evaluate(x); };
      if (lo < 0.0 && hi > 0.0) {
        ref += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, 0.0, 15, 1e-14);
        lo = 0.0;
      }
      ref += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
    }
    EXPECT_NEAR(truncated_moment(mu, a, INFINITY), ref, 1e-10);
    EXPECT_LE(truncated_moment(mu, a, 1.7), truncated_moment(mu, a, 2.3));
  }
}

TEST(Moments, FamilyDivergenceDiagnostic) {
  // int |lambda|^{2 alpha} (1 + lambda^2)^{-beta} is finite iff 2 alpha < 2 beta - 1
  for (auto [beta, alpha, finite] : {std::tuple{1.0, 0.25, true}, std::tuple{1.0, 0.5, false},
                                     std::tuple{1.5, 0.9, true}, std::tuple{1.5, 1.1, false},
                                     std::tuple{0.75, 0.3, false}}) {
    const auto mu = SpectralMeasure::from_family(DensityFamily::matern(beta), 32.0, 1025);
    EXPECT_EQ(spectral_moment(mu, alpha).diagnostic.finite, finite) << beta << " " << alpha;
  }
  EXPECT_TRUE(spectral_moment(two_atoms(), 0.7).diagnostic.finite);
}

TEST(Decompose, SplitsAtomsFromDensity) {
  SpectralMeasure mu({{0.5, 0.25}}, ramp_grid());
  const auto d = decompose(mu);
  EXPECT_TRUE(d.continuous.atoms().empty());
  EXPECT_FALSE(d.discrete.density().has_value());
  EXPECT_NEAR(d.continuous.total_mass() + d.discrete.total_mass(), mu.total_mass(), 1e-15);
}

TEST(Filter, ScalesByResponseSquared) {
  SpectralMeasure mu({{2.0, 0.25}}, ramp_grid());
  const auto f = filter_measure(mu, [](double x) { return Complex(0.0, x); });
  EXPECT_NEAR(f.atoms()[0].mass, 1.0, 1e-15);
  EXPECT_NEAR(f.density()->values[0], 0.2, 1e-15);
  EXPECT_THROW(filter_measure(mu, [](double x) { return Complex(1.0 / (x - 2.0)); }), std::domain_error);
  const auto carrier = continuous_carrier(mu);
  EXPECT_EQ(carrier(2.0), Complex(0.0));
  EXPECT_EQ(carrier(2.1), Complex(1.0));
}

TEST(Json, MeasureRoundTrip) {
  SpectralMeasure mu({{-1.0, 0.25}, {1.0, 0.25}}, DensityFamily::band(0.5, 2.5, 0.5).tabulate(2.5, 101), true,
                     DensityFamily::band(0.5, 2.5, 0.5));
  nlohmann::json j = mu;
  const auto back = measure_from_json(j);
  EXPECT_EQ(nlohmann::json(back), j);
  nlohmann::json spec = {{"family", {{"kind", "matern"}, {"beta", 1.0}, {"grid_max", 8.0}, {"nodes", 65}}},
                         {"symmetric", true}};
  const auto m2 = measure_from_json(spec);
  EXPECT_EQ(m2.density()->nodes(), 65);
  EXPECT_TRUE(m2.family().has_value());
  EXPECT_THROW(measure_from_json({{"family", {{"kind", "cauchy"}}}}), std::invalid_argument);
}

TEST(Integrate, DensityAndFamilyAgree) {
  const auto fam = DensityFamily::matern(2.0);
  const auto g = fam.tabulate(20.0, 4001);
  auto f = [](double x) { return x * x; };
  double ref = 0.0;
  for (Eigen::Index i = 0; i + 1 < g.nodes(); ++i) {
    ref += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double x) { return f(x) * g.evaluate(x); }, g.node(i), g.node(i + 1), 0, 0.0);
  }
  const double a = integrate_density<double>(g, f);
  EXPECT_NEAR(a, ref, 1e-12);
  // the table differs from the family by O(h^2) interpolation error
  EXPECT_NEAR(a, integrate_family<double>(fam, f, -20.0, 20.0), 1e-4);
}

TEST(Covariance, SmallLagSeriesMatchesPositiveIntegrand) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const auto fam = DensityFamily::band(0.5, 1.5, 0.8);
  // Step 0.005: the interpolant ramps up on [0.495, 0.5].
  const auto table = fam.tabulate(1.5, 601);
  const SpectralMeasure with_family({{0.3, 0.2}}, table, false, fam);
  for (bool prefer : {true, false}) {
    const Covariance R(with_family, prefer);
    for (double h : {1e-7, 1e-4, 0.01, 0.3, 0.9, 3.0}) {
      // Integrands 2 sin^2 and 16 sin^4 are nonnegative, so quadrature has no cancellation.
      auto rho = [&](double x) { return prefer ? fam.density(x) : table.evaluate(x); };
      auto inc = [&](double x) { return 2.0 * std::pow(std::sin(0.5 * h * x), 2) * rho(x); };
      auto sd = [&](double x) { return 16.0 * std::pow(std::sin(0.5 * h * x), 4) * rho(x); };
      double oi = 0.0, os = 0.0;
      for (auto [lo, hi] : {std::pair{-1.5, -0.5}, std::pair{-0.5, -0.495}, std::pair{0.495, 0.5},
                            std::pair{0.5, 1.5}}) {
        oi += GK::integrate(inc, lo, hi, 15, 1e-15);
        os += GK::integrate(sd, lo, hi, 15, 1e-15);
      }
      const double s = std::sin(0.15 * h);
      oi += 0.2 * 2.0 * s * s;
      os += 0.2 * 16.0 * s * s * s * s;
      EXPECT_NEAR(R.increment(h).real(), oi, 1e-12 * oi) << prefer << " " << h;
      EXPECT_NEAR(R.second_difference(h), os, 1e-9 * os + 1e-300) << prefer << " " << h;
    }
  }
}
