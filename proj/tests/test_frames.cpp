#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <numbers>
#include <random>

#include "apframe/frames.hpp"

using namespace apframe;

namespace {
constexpr double kPi = std::numbers::pi;

// Is x / (2 pi / b) an integer, decided in floating point.
bool in_d_float(double x, double b) {
  const double n = x / (2.0 * kPi / b);
  return std::abs(n - std::round(n)) < 1e-9;
}
}  // namespace

TEST(AdicRational, CanonicalForm) {
  const auto q = AdicRational::lattice(12, 3, 2);
  EXPECT_EQ(q.numerator(), 3);
  EXPECT_EQ(q.a_power(), 1);
  EXPECT_TRUE(AdicRational::lattice(0, 7, 3).is_zero());
  EXPECT_EQ(AdicRational::lattice(0, 7, 3), AdicRational::lattice(0, -2, 3));
  EXPECT_EQ(AdicRational::lattice(9, 2, 3), AdicRational::lattice(1, 0, 3));
  EXPECT_NEAR(q.value(1.0), 2.0 * kPi * 1.5, 1e-14);
}

TEST(AdicRational, Arithmetic) {
  const auto x = AdicRational::lattice(3, 2, 2), y = AdicRational::lattice(1, 1, 2);
  EXPECT_EQ(x - y, AdicRational::lattice(1, 2, 2));
  EXPECT_EQ(x + y, AdicRational::lattice(5, 2, 2));
  EXPECT_EQ(x.times_a(), AdicRational::lattice(3, 1, 2));
  EXPECT_FALSE((x - AdicRational::off_lattice(0.1, 2)).on_lattice());
  EXPECT_THROW(x - AdicRational::lattice(1, 1, 3), std::invalid_argument);
  EXPECT_THROW(AdicRational::lattice(1, 0, 2) - AdicRational::lattice(1, 80, 2), std::overflow_error);
}

TEST(Valuation, MatchesFloatingSearch) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> nd(-200, 200), md(-4, 6);
  for (int a : {2, 3, 5}) {
    for (int t = 0; t < 300; ++t) {
      const int n = nd(gen), m = md(gen);
      const auto q = AdicRational::lattice(n, m, a);
      const auto v = valuation(q);
      if (n == 0) {
        EXPECT_EQ(v.kind, Valuation::Kind::MinusInfinity);
        continue;
      }
      int first = 100;
      for (int j = -20; j <= 20; ++j) {
        const double x = n * std::pow(double(a), j - m);
        const bool in = std::abs(x) >= 0.5 && std::abs(x - std::round(x)) < 1e-9;
        EXPECT_EQ(in_dual_lattice_after_dilation(q, j), in) << n << " " << m << " " << j;
        if (in && first == 100) first = j;
      }
      ASSERT_TRUE(v.finite());
      EXPECT_EQ(v.value, first);
      EXPECT_TRUE(v.admits(first));
      EXPECT_FALSE(v.admits(first - 1));
    }
  }
  EXPECT_EQ(valuation(AdicRational::off_lattice(0.3, 2)).kind, Valuation::Kind::PlusInfinity);
  EXPECT_EQ(valuation(AdicRational::off_lattice(0.3, 2)).str(), "+inf");
}

TEST(AffineProduct, MatchesBruteForce) {
  for (const auto& w : {MotherWavelet::shannon(), MotherWavelet::meyer()}) {
    AffineSystem sys(w, 2, 1.0);
    const double base = 0.83;
    for (int n1 = -12; n1 <= 12; n1 += 3) {
      for (int n2 = -7; n2 <= 9; n2 += 2) {
        const auto q1 = AdicRational::lattice(n1, 3, 2), q2 = AdicRational::lattice(n2, 3, 2);
        const double l1 = base + q1.value(1.0), l2 = base + q2.value(1.0);
        Complex brute(0.0, 0.0);
        for (int j = -40; j <= 40; ++j) {
          const double s = std::pow(2.0, j);
          if (in_d_float(s * (l1 - l2), 1.0)) brute += w(s * l1) * std::conj(w(s * l2));
        }
        const Complex got = affine_product(sys, l1, l2, valuation(q1 - q2));
        EXPECT_NEAR(std::abs(got - brute), 0.0, 1e-14) << w.name() << " " << n1 << " " << n2;
      }
    }
  }
}

TEST(AffineProduct, OffLatticeIsZero) {
  AffineSystem sys(MotherWavelet::meyer(), 2, 1.0);
  EXPECT_EQ(affine_product(sys, AdicRational::off_lattice(0.5, 2), AdicRational::lattice(1, 0, 2)), Complex(0.0));
}

TEST(Fiber, HermitianAndSumOfScales) {
  AffineSystem sys(MotherWavelet::meyer(), 2, 1.0);
  const auto qs = default_q_set(sys, 2, 6.0);
  const auto f = gramian_fiber(sys, 0.41, qs);
  EXPECT_LT((f.entries - f.entries.adjoint()).norm(), 1e-15);
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(f.entries.rows(), f.entries.cols());
  for (int j = f.j_window.lo; j <= f.j_window.hi; ++j) sum += gramian_fiber_scale(sys, 0.41, qs, j);
  EXPECT_LT((f.entries - sum).cwiseAbs().maxCoeff(), 1e-14);
  // Diagonal entries are Littlewood-Paley sums at lambda + q.
  for (Eigen::Index i = 0; i < f.entries.rows(); ++i) {
    const double x = 0.41 + qs[i].value(1.0);
    EXPECT_NEAR(f.entries(i, i).real(), littlewood_paley(sys, x).value, 1e-12);
  }
}

TEST(Fiber, DefaultQSetSpacing) {
  AffineSystem sys(MotherWavelet::shannon(), 2, 1.0);
  const auto qs = default_q_set(sys, 2, 8.0);
  // step 2 pi / 4, |q| <= 8
  EXPECT_EQ(qs.size(), 2u * 5u + 1u);
  EXPECT_NEAR(qs.back().value(1.0), 5.0 * kPi / 2.0, 1e-14);
  EXPECT_THROW(default_q_set(sys, -1, 8.0), std::invalid_argument);
}

TEST(Rayleigh, MatchesDenseEigensolver) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  for (int n : {5, 20, 60}) {
    Eigen::MatrixXcd x(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) x(i, k) = Complex(nd(gen), nd(gen));
    // Known, evenly spread spectrum in a random unitary basis.
    const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(x).householderQ();
    const Eigen::VectorXd ev = Eigen::VectorXd::LinSpaced(n, 0.5, 3.0);
    const Eigen::MatrixXcd g = q * ev.cast<Complex>().asDiagonal() * q.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
    const auto rb = fiber_rayleigh_bounds(g, 8, 3);
    EXPECT_TRUE(rb.converged) << n;
    EXPECT_NEAR(rb.high, es.eigenvalues().maxCoeff(), 1e-9) << n;
    EXPECT_NEAR(rb.low, es.eigenvalues().minCoeff(), 1e-9) << n;
    EXPECT_NEAR(rb.high, 3.0, 1e-9);
  }
}

TEST(Rayleigh, ClusteredSpectrumStaysInRange) {
  const int n = 40;
  Eigen::VectorXd ev = Eigen::VectorXd::Constant(n, 1.0);
  for (int i = 0; i < n; ++i) ev[i] = 1.0 + 1e-7 * i;
  Eigen::MatrixXcd g = ev.cast<Complex>().asDiagonal();
  g(0, 1) = g(1, 0) = 1e-8;
  const auto rb = fiber_rayleigh_bounds(g, 4, 2);
  // Bounds stay inside the true range even when the iteration stops early.
  EXPECT_LE(rb.high, ev.maxCoeff() + 1e-12);
  EXPECT_GE(rb.low, ev.minCoeff() - 1e-6);
}

TEST(Rayleigh, ShannonFiberIsIdentityLike) {
  AffineSystem sys(MotherWavelet::shannon(), 2, 1.0);
  const auto qs = default_q_set(sys, 2, 8.0);
  for (double lam : {0.37, 1.0, 2.5}) {
    const auto f = gramian_fiber(sys, lam, qs);
    const auto rb = fiber_rayleigh_bounds(f, 16, 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(f.entries);
    EXPECT_NEAR(rb.high, es.eigenvalues().maxCoeff(), 1e-9);
    EXPECT_NEAR(rb.low, es.eigenvalues().minCoeff(), 1e-9);
    EXPECT_FALSE(rb.caveat.empty());
  }
}

TEST(FrameBounds, TightAndDegenerateCases) {
  const auto grid = symmetric_log_grid(1e-3, 1e3, 2000);
  const auto sh = frame_bounds_bandlimited(AffineSystem(MotherWavelet::shannon(), 2, 1.0), grid);
  EXPECT_EQ(sh.A, 1.0);
  EXPECT_EQ(sh.B, 1.0);
  EXPECT_TRUE(sh.is_frame);
  const auto me = frame_bounds_bandlimited(AffineSystem(MotherWavelet::meyer(), 2, 1.0), grid);
  EXPECT_NEAR(me.A, 1.0, 1e-10);
  EXPECT_NEAR(me.B, 1.0, 1e-10);
  const auto twice = frame_bounds_bandlimited(AffineSystem(MotherWavelet::shannon().scaled(2.0), 2, 1.0), grid);
  EXPECT_DOUBLE_EQ(twice.A, 4.0);
  // A band narrower than one octave leaves gaps.
  const auto gap = frame_bounds_bandlimited(AffineSystem(MotherWavelet::shannon(kPi, 1.5 * kPi), 2, 1.0), grid);
  EXPECT_EQ(gap.A, 0.0);
  EXPECT_FALSE(gap.is_frame);
  // Overlapping octaves double count.
  const auto wide = frame_bounds_bandlimited(AffineSystem(MotherWavelet::shannon(kPi, 4.0 * kPi), 2, 1.0), grid);
  EXPECT_EQ(wide.A, 2.0);
  EXPECT_EQ(wide.B, 2.0);
}

TEST(FrameBounds, LogGrid) {
  const auto g = symmetric_log_grid(1e-2, 1e2, 10);
  ASSERT_EQ(g.size(), 10u);
  EXPECT_NEAR(g.front(), -1e2, 1e-12);
  EXPECT_NEAR(g[5], 1e-2, 1e-16);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(g[i], -g[9 - i]);
  EXPECT_THROW(symmetric_log_grid(1.0, 0.5, 10), std::invalid_argument);
}

TEST(FiberJson, CarriesEntries) {
  AffineSystem sys(MotherWavelet::shannon(), 2, 1.0);
  const auto f = gramian_fiber(sys, 1.0, default_q_set(sys, 1, 4.0));
  const auto j = fiber_to_json(f, 1.0);
  EXPECT_EQ(j["q_set"].size(), f.q_set.size());
  EXPECT_EQ(j["entries_re"].size(), static_cast<std::size_t>(f.entries.rows()));
  EXPECT_DOUBLE_EQ(j["entries_re"][0][0].get<double>(), f.entries(0, 0).real());
}

TEST(Rayleigh, SmallClosedForms) {
  Eigen::MatrixXcd g(2, 2);
  g << 2.0, 1.0, 1.0, 2.0;
  const auto rb = fiber_rayleigh_bounds(g, 8, 4);
  EXPECT_NEAR(rb.low, 1.0, 1e-10);
  EXPECT_NEAR(rb.high, 3.0, 1e-10);
  const auto z = fiber_rayleigh_bounds(Eigen::MatrixXcd::Zero(4, 4), 4, 1);
  EXPECT_EQ(z.low, 0.0);
  EXPECT_EQ(z.high, 0.0);
}
