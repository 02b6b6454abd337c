#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "apframe/ergodic.hpp"

using namespace apframe;

namespace {
constexpr double kPi = std::numbers::pi;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

UniformSamples sample(const TrigSum& s, double T, double dt, double extra = 0.0) {
  const auto m = static_cast<Eigen::Index>(std::llround(T / dt));
  const auto e = static_cast<Eigen::Index>(std::llround(extra / dt));
  UniformSamples u;
  u.dt = dt;
  u.t0 = -static_cast<double>(m) * dt;
  u.values = s.evaluate_uniform(u.t0, dt, 2 * m + 1 + e);
  return u;
}

const TrigSum kSum{{-0.7, 0.3, 1.9}, {Complex(0.5, -1.0), Complex(1.2, 0.0), Complex(0.0, 0.4)}};

SpectralMeasure mixed_measure() {
  return SpectralMeasure::from_family(DensityFamily::band(0.5, 2.5, 0.5), 2.5, 2001, {{-1.0, 0.25}, {1.0, 0.25}});
}
}  // namespace

TEST(BatchMean, ConstantAndAlternating) {
  EXPECT_EQ(batch_mean(Eigen::VectorXd::Constant(320, 2.5)), std::make_pair(2.5, 0.0));
  Eigen::VectorXd x(64);
  for (int i = 0; i < 64; ++i) x[i] = i < 32 ? 0.0 : 1.0;
  const auto [m, se] = batch_mean(x);
  EXPECT_DOUBLE_EQ(m, 0.5);
  // 16 batch means, half 0 and half 1.
  EXPECT_NEAR(se, std::sqrt(16.0 / 60.0 / 16.0), 1e-15);
}

TEST(B2, SingleExponentialIsExact) {
  const TrigSum s{{1.3}, {Complex(0.6, 0.8)}};
  const auto tr = b2_norm_samples(sample(s, 100.0, 0.1), {10.0, 50.0, 100.0});
  for (double p : tr.partials) EXPECT_NEAR(p, 1.0, 1e-12);
  EXPECT_LT(tr.cauchy_gap, 1e-12);
}

TEST(B2, MatchesFiniteHorizonClosedForm) {
  const double T = 400.0;
  const auto tr = b2_norm_samples(sample(kSum, T, 0.05), {T});
  double exact = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t l = 0; l < 3; ++l) {
      exact += (kSum.coeff[k] * std::conj(kSum.coeff[l])).real() * sinc((kSum.freq[k] - kSum.freq[l]) * T);
    }
  }
  EXPECT_NEAR(tr.estimate, exact, 1e-6);
  EXPECT_NEAR(tr.estimate, 0.25 + 1.0 + 1.44 + 0.16, 5e-3);
  EXPECT_THROW(b2_norm_samples(sample(kSum, 10.0, 0.5), {5.0, 5.0}), std::invalid_argument);
  EXPECT_THROW(b2_norm_samples(sample(kSum, 10.0, 0.5), {20.0}), std::invalid_argument);
}

TEST(B2, SequenceAverage) {
  Eigen::VectorXcd x(201);
  for (int n = -100; n <= 100; ++n) x[n + 100] = std::polar(2.0, 0.3 * n);
  const auto tr = b2_norm_sequence(x, {10, 100});
  EXPECT_NEAR(tr.estimate, 4.0, 1e-13);
  EXPECT_THROW(b2_norm_sequence(x, {101}), std::invalid_argument);
}

TEST(Bohr, PicksCoefficient) {
  const double T = 500.0;
  const auto path = sample(kSum, T, 0.05);
  for (std::size_t k = 0; k < 3; ++k) {
    Complex exact(0.0);
    for (std::size_t l = 0; l < 3; ++l) exact += kSum.coeff[l] * sinc((kSum.freq[l] - kSum.freq[k]) * T);
    const Complex got = bohr_transform(path, kSum.freq[k], T);
    EXPECT_NEAR(std::abs(got - exact), 0.0, 1e-6);
    EXPECT_NEAR(std::abs(got - kSum.coeff[k]), 0.0, 0.01);
  }
  EXPECT_LT(std::abs(bohr_transform(path, 5.0, T)), 0.01);
}

TEST(Bohr, SequencePicksCoefficient) {
  Eigen::VectorXcd x(2001);
  for (int n = -1000; n <= 1000; ++n) x[n + 1000] = std::polar(1.5, 0.4 * n * 0.5) + std::polar(0.5, 1.1 * n * 0.5);
  EXPECT_NEAR(std::abs(bohr_transform_sequence(x, 0.5, 0.4, 1000) - 1.5), 0.0, 5e-3);
}

TEST(Autocorrelation, DeterministicSumConvergesToSpectralForm) {
  const double T = 400.0, dt = 0.05;
  for (double tau : {0.0, 1.0, -2.5}) {
    // Path on [-T - max(-tau, 0), T + max(tau, 0)].
    const auto m = std::llround(T / dt), b = std::llround(std::max(-tau, 0.0) / dt),
               e = std::llround(std::max(tau, 0.0) / dt);
    UniformSamples path;
    path.dt = dt;
    path.t0 = -static_cast<double>(m + b) * dt;
    path.values = kSum.evaluate_uniform(path.t0, dt, 2 * m + 1 + b + e);
    Complex exact(0.0), limit(0.0);
    for (std::size_t k = 0; k < 3; ++k) {
      limit += std::norm(kSum.coeff[k]) * std::polar(1.0, -kSum.freq[k] * tau);
      for (std::size_t l = 0; l < 3; ++l) {
        exact += kSum.coeff[k] * std::conj(kSum.coeff[l]) * std::polar(1.0, -kSum.freq[l] * tau) *
                 sinc((kSum.freq[k] - kSum.freq[l]) * T);
      }
    }
    const auto got = autocorrelation_samples(path, tau, T);
    EXPECT_NEAR(std::abs(got.value - exact), 0.0, 1e-6) << tau;
    EXPECT_NEAR(std::abs(got.value - limit), 0.0, 5e-3) << tau;
  }
}

TEST(Autocorrelation, ProcessEstimateMatchesSampledPath) {
  const auto proc = synthesize(mixed_measure(), 3, 0);
  const double T = 200.0, dt = 0.25;
  const auto est = autocorrelation_estimate(proc, 1.0, T, dt);
  const UniformSamples path = sample_symmetric(proc, T, dt, 1.0);
  const auto direct = autocorrelation_samples(path, 1.0, T);
  EXPECT_NEAR(std::abs(est.value - direct.value), 0.0, 1e-12);
  EXPECT_THROW(autocorrelation_estimate(proc, 0.3, T, dt), std::invalid_argument);
}

TEST(Coefficients, SequenceMatchesDirectSum) {
  AffineSystem sys(MotherWavelet::meyer(), 2, 0.5);
  const TrigSum s{{-2.0, 0.9, 1.7, 3.5}, {Complex(1, 0), Complex(0.2, 0.3), Complex(-1, 1), Complex(0.5, 0)}};
  for (int j : {-1, 0, 1}) {
    const auto z = coefficient_sequence(s, sys, j, 20);
    const double sc = std::pow(2.0, j);
    for (int n = -20; n <= 20; ++n) {
      Complex direct(0.0);
      for (std::size_t i = 0; i < s.freq.size(); ++i) {
        direct += std::conj(sys.wavelet(sc * s.freq[i])) * s.coeff[i] * std::polar(1.0, s.freq[i] * n * 0.5 * sc);
      }
      EXPECT_NEAR(std::abs(z[n + 20] - direct), 0.0, 1e-13);
    }
  }
}

TEST(Coefficients, PeriodizationMergesAndGivesWienerLimit) {
  AffineSystem sys(MotherWavelet::meyer(), 2, 1.0);
  const int j = 1;
  // Frequencies 1.6 and 1.6 + pi coincide modulo D_1 = pi Z.
  const TrigSum s{{1.6, 1.6 + kPi, 2.9}, {Complex(1.0, 0.0), Complex(0.0, 1.0), Complex(0.7, 0.0)}};
  const auto per = periodized_coefficients(s, sys, j);
  ASSERT_EQ(per.size(), 2u);
  double wiener = 0.0;
  for (const auto& [rep, d] : per) wiener += std::norm(d);
  const Complex merged = std::conj(sys.wavelet(3.2)) * 1.0 + std::conj(sys.wavelet(2.0 * (1.6 + kPi))) * Complex(0, 1);
  EXPECT_NEAR(std::abs(per.begin()->second - merged), 0.0, 1e-14);
  const auto z = coefficient_sequence(s, sys, j, 20000);
  EXPECT_NEAR(z.squaredNorm() / z.size(), wiener, 1e-3);
}

TEST(Coefficients, CovarianceMatchesQuadrature) {
  const auto mu = mixed_measure();
  AffineSystem sys(MotherWavelet::meyer(), 2, 1.0);
  for (double k : {0.0, 1.0, 3.0}) {
    auto f = [&](double lam, bool im) {
      const double v = mu.density()->evaluate(lam) * std::norm(sys.wavelet(lam));
      return im ? v * std::sin(lam * k) : v * std::cos(lam * k);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    Complex oracle(0.0);
    for (auto [lo, hi] : {std::pair{2.0 * kPi / 3.0, 2.5}, std::pair{-2.5, -2.0 * kPi / 3.0}}) {
      oracle += Complex(GK::integrate([&](double x) { return f(x, false); }, lo, hi, 15, 1e-14),
                        GK::integrate([&](double x) { return f(x, true); }, lo, hi, 15, 1e-14));
    }
    // Atoms at +-1 fall outside the Meyer band at j = 0.
    EXPECT_NEAR(std::abs(coeff_covariance(sys, mu, 0, k) - oracle), 0.0, 1e-9) << k;
  }
  const Complex at = coeff_covariance(sys, mu, 1, 2.0);
  Complex dens(0.0);
  {
    auto g = [&](double lam, bool im) {
      const double v = mu.density()->evaluate(lam) * std::norm(sys.wavelet(2.0 * lam));
      return im ? v * std::sin(4.0 * lam) : v * std::cos(4.0 * lam);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    for (auto [lo, hi] : {std::pair{kPi / 3.0, 2.5}, std::pair{-2.5, -kPi / 3.0}}) {
      dens += Complex(GK::integrate([&](double x) { return g(x, false); }, lo, hi, 15, 1e-14),
                      GK::integrate([&](double x) { return g(x, true); }, lo, hi, 15, 1e-14));
    }
  }
  const Complex atoms = 0.25 * std::norm(sys.wavelet(2.0)) * (std::polar(1.0, 4.0) + std::polar(1.0, -4.0));
  EXPECT_NEAR(std::abs(at - atoms - dens), 0.0, 1e-9);
}

TEST(Coefficients, CovarianceMonteCarlo) {
  const auto mu = mixed_measure();
  AffineSystem sys(MotherWavelet::meyer(), 2, 1.0);
  const int reps = 3000;
  Complex acc(0.0);
  double acc2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto z = coefficient_sequence(synthesize(mu, 21, static_cast<std::uint64_t>(r)), sys, 1, 2);
    const Complex v = z[2 + 2] * std::conj(z[2]);
    acc += v;
    acc2 += std::norm(v);
  }
  const Complex mean = acc / double(reps);
  const double se = std::sqrt((acc2 / reps - std::norm(mean)) / reps);
  EXPECT_LT(std::abs(mean - coeff_covariance(sys, mu, 1, 2.0)), 4.0 * se);
}

TEST(Decomposition, AdditiveAndCrossSmall) {
  const auto proc = synthesize(mixed_measure(), 8, 2);
  AffineSystem sys(MotherWavelet::shannon(), 2, 1.0);
  const auto rep = decomposition_check(proc, sys, 2, 4096);
  EXPECT_LE(rep.additivity_error, 1e-12);
  EXPECT_GT(rep.norm_continuous, 0.0);
  EXPECT_GT(rep.norm_discrete, 0.0);
  const double expand = rep.norm_continuous + rep.norm_discrete + 2.0 * rep.cross_term.real();
  EXPECT_NEAR(rep.norm_total, expand, 1e-10);
}

TEST(ApFrameSum, ShannonSandwichOnAtoms) {
  const SpectralMeasure mu({{-1.0, 0.5}, {1.0, 0.5}, {2.2, 0.3}}, std::nullopt);
  const auto proc = synthesize(mu, 4, 0);
  AffineSystem sys(MotherWavelet::shannon(), 2, 1.0);
  const auto r = ap_frame_sum(proc, sys, {-1, 3}, 8192, 1000.0, 0.25, 1.0, 1.0, 0.02);
  EXPECT_TRUE(r.holds) << r.middle << " " << r.b2;
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(r.per_scale.size(), 5u);
  const auto narrow = ap_frame_sum(proc, sys, {2, 3}, 256, 100.0, 0.25, 1.0, 1.0, 0.02);
  EXPECT_FALSE(narrow.warnings.empty());
}

TEST(B2, AliasingWarning) {
  const SpectralMeasure mu({{10.0, 1.0}}, std::nullopt);
  const auto tr = b2_norm_continuous(synthesize(mu, 1, 0), {10.0}, 0.5);
  EXPECT_FALSE(tr.warnings.empty());
  EXPECT_NEAR(highest_frequency(synthesize(mu, 1, 0)), 10.0, 0.0);
}
