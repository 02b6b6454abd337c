#include <gtest/gtest.h>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <numbers>

#include "apframe/frames.hpp"
#include "apframe/wavelet.hpp"

using namespace apframe;

namespace {
constexpr double kPi = std::numbers::pi;

// Direct sum over a generous fixed window, no band bookkeeping.
double lp_brute(const MotherWavelet& w, int a, double lambda) {
  double s = 0.0;
  for (int j = -60; j <= 60; ++j) s += std::norm(w(std::pow(double(a), j) * lambda));
  return s;
}
}  // namespace

TEST(Shannon, HalfOpenBand) {
  const auto w = MotherWavelet::shannon();
  EXPECT_EQ(w(kPi), Complex(1.0));
  EXPECT_EQ(w(2.0 * kPi), Complex(0.0));
  EXPECT_EQ(w(-kPi), Complex(0.0));
  EXPECT_EQ(w(-2.0 * kPi), Complex(1.0));
  EXPECT_EQ(w(0.0), Complex(0.0));
}

TEST(Shannon, LittlewoodPaleyIsOneOnLogGrid) {
  AffineSystem sys(MotherWavelet::shannon(), 2, 1.0);
  double err = 0.0;
  for (double x : symmetric_log_grid(1e-3, 1e3, 4000)) {
    const double v = littlewood_paley(sys, x).value;
    err = std::max(err, std::abs(v - 1.0));
    ASSERT_EQ(v, lp_brute(sys.wavelet, 2, x)) << x;
  }
  EXPECT_LT(err, 1e-12);
}

TEST(Meyer, LittlewoodPaleyMatchesBruteForceAndOne) {
  AffineSystem sys(MotherWavelet::meyer(), 2, 1.0);
  double err = 0.0;
  for (double x : symmetric_log_grid(1e-3, 1e3, 4000)) {
    const double v = littlewood_paley(sys, x).value;
    err = std::max(err, std::abs(v - 1.0));
    ASSERT_NEAR(v, lp_brute(sys.wavelet, 2, x), 1e-15);
  }
  EXPECT_LT(err, 1e-10);
}

TEST(Meyer, SupportAndSymmetricModulus) {
  const auto w = MotherWavelet::meyer();
  EXPECT_EQ(w(2.0 * kPi / 3.0 * 0.999), Complex(0.0));
  EXPECT_EQ(w(8.0 * kPi / 3.0 * 1.001), Complex(0.0));
  for (double x : {2.2, 3.0, 4.5, 7.9}) EXPECT_NEAR(std::abs(w(x)), std::abs(w(-x)), 1e-15);
  EXPECT_NEAR(std::abs(w(4.0 * kPi / 3.0)), 1.0, 1e-15);
}

TEST(MotherWavelet, RejectsValuesOffDeclaredBand) {
  EXPECT_THROW(MotherWavelet("bad", [](double) -> Complex { return 1.0; }, Band{1.0, 2.0}),
               std::invalid_argument);
  EXPECT_THROW(MotherWavelet::shannon(2.0, 1.0), std::invalid_argument);
}

TEST(MotherWavelet, TabulatedInterpolates) {
  const auto w = MotherWavelet::tabulated({1.0, 2.0, 3.0}, {1.0, Complex(0.0, 2.0), 0.0}, Band{1.0, 3.0});
  EXPECT_NEAR(std::abs(w(1.5) - Complex(0.5, 1.0)), 0.0, 1e-15);
  EXPECT_EQ(w(0.5), Complex(0.0));
  EXPECT_EQ(w(3.5), Complex(0.0));
  EXPECT_THROW(MotherWavelet::tabulated({2.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(MotherWavelet::tabulated({1.0, 2.0}, {1.0}), std::invalid_argument);
}

TEST(MotherWavelet, ScaledMultipliesBounds) {
  const auto w = wavelet_from_json({{"name", "shannon"}, {"c1_bound", 1.0}, {"scale", 3.0}});
  EXPECT_EQ(w(4.0), Complex(3.0));
  ASSERT_TRUE(w.c1_bound());
  EXPECT_DOUBLE_EQ(*w.c1_bound(), 9.0);
}

TEST(PsiJK, LatticeAndNormalization) {
  AffineSystem sys(MotherWavelet::shannon(), 2, 1.0);
  EXPECT_THROW(psi_jk_hat(sys, 0, 0.5, 4.0), std::invalid_argument);
  // lambda = 1 at j = 2 lands on 4, inside [pi, 2 pi).
  const Complex v = psi_jk_hat(sys, 2, 3.0, 1.0);
  EXPECT_NEAR(std::abs(v - std::polar(1.0, -12.0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(psi_jk_hat(sys, 2, 3.0, 1.0, Normalization::L2)), 2.0, 1e-14);
  AffineSystem half(MotherWavelet::shannon(), 2, 0.5);
  EXPECT_NO_THROW(psi_jk_hat(half, 0, 1.5, 4.0));
}

TEST(Riesz, MultipliesByPowerAndKeepsBand) {
  const auto r = riesz_potential(MotherWavelet::meyer(), 0.3);
  for (double x : {2.5, -3.7, 6.0}) {
    EXPECT_NEAR(std::abs(r(x) - std::pow(std::abs(x), -0.3) * MotherWavelet::meyer()(x)), 0.0, 1e-15);
  }
  ASSERT_TRUE(r.band());
  EXPECT_EQ(r(0.0), Complex(0.0));
  EXPECT_THROW(riesz_potential(MotherWavelet::meyer(), 1.0), std::invalid_argument);
}

TEST(Riesz, UnboundedNearZeroIsRejected) {
  const MotherWavelet gauss("gauss", [](double x) -> Complex { return std::exp(-x * x); });
  EXPECT_THROW(riesz_potential(gauss, 0.5), std::domain_error);
  const MotherWavelet ramp("ramp", [](double x) -> Complex { return x * std::exp(-x * x); });
  EXPECT_NO_THROW(riesz_potential(ramp, 0.5));
}

TEST(Riesz, GammaConstantMatchesFourierIntegral) {
  // gamma(alpha) |lambda|^{-alpha} is the transform of |x|^{alpha - 1}; at lambda = 1
  // that is 2 int_0^inf x^{alpha-1} cos x dx.
  boost::math::quadrature::ooura_fourier_cos<double> cosint;
  boost::math::quadrature::ooura_fourier_sin<double> sinint;
  for (double al : {0.2, 0.5, 0.8}) {
    const double head = 2.0 / al;
    // int_1^inf x^{al-1} cos x dx with x = u + 1, so the integrands stay smooth.
    auto g = [al](double u) { return std::pow(u + 1.0, al - 1.0); };
    const double tail = std::cos(1.0) * cosint.integrate(g, 1.0).first - std::sin(1.0) * sinint.integrate(g, 1.0).first;
    // int_0^1 x^{al-1}(cos x - 1) dx by series.
    double corr = 0.0, term = 1.0;
    for (int n = 1; n < 30; ++n) {
      term *= -1.0 / ((2.0 * n - 1.0) * (2.0 * n));
      corr += term / (al + 2.0 * n);
    }
    const double oracle = head + 2.0 * tail + 2.0 * corr;
    EXPECT_NEAR(gamma_constant(al), oracle, 1e-7 * oracle) << al;
    EXPECT_NEAR(gamma_constant(al), 2.0 * std::tgamma(al) * std::cos(kPi * al / 2.0), 1e-12);
  }
}

TEST(C1, ShannonLatticeCoversOnce) {
  AffineSystem sys(MotherWavelet::shannon(), 2, 1.0);
  EXPECT_NEAR(c1_supremum(sys, 0, 1000).value, 1.0, 1e-15);
  EXPECT_NEAR(c1_supremum(sys, 3, 1000).value, 1.0, 1e-15);
}

TEST(C1, MeyerMatchesExplicitRange) {
  AffineSystem sys(MotherWavelet::meyer(), 2, 1.0);
  for (int j : {-1, 0, 2}) {
    const auto auto_range = c1_supremum(sys, j, 500);
    const auto wide = c1_supremum(sys, j, 500, std::make_pair(-40, 40));
    EXPECT_NEAR(auto_range.value, wide.value, 1e-15) << j;
  }
  const auto w = wavelet_from_json({{"name", "meyer"}, {"c1_bound", 0.5}});
  EXPECT_EQ(c1_supremum(AffineSystem(w, 2, 1.0), 0, 200).within_bound, std::optional<bool>(false));
}

TEST(WaveletJson, Errors) {
  EXPECT_THROW(wavelet_from_json(nlohmann::json::object()), std::invalid_argument);
  EXPECT_THROW(wavelet_from_json({{"name", "haar"}}), std::invalid_argument);
  EXPECT_THROW(wavelet_from_json({{"name", "tabulated"}, {"grid", {1, 2}}, {"re", {1, 1}}, {"im", {0}}}),
               std::invalid_argument);
  EXPECT_EQ(wavelet_from_json({{"name", "shannon"}, {"band", {1.0, 2.0}}})(1.5), Complex(1.0));
}

TEST(Affine, ActiveScalesCoverLittlewoodPaley) {
  AffineSystem sys(MotherWavelet::meyer(), 3, 1.0);
  for (double x : {0.01, 0.7, 13.0}) {
    const auto r = active_scales(sys, x);
    double inside = 0.0;
    for (int j = r.lo; j <= r.hi; ++j) inside += std::norm(sys.wavelet(sys.scale(j) * x));
    EXPECT_NEAR(inside, lp_brute(sys.wavelet, 3, x), 1e-15);
  }
  EXPECT_THROW(AffineSystem(MotherWavelet::meyer(), 1, 1.0), std::invalid_argument);
}
