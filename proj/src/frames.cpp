#include "apframe/frames.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "apframe/rng.hpp"

namespace apframe {

namespace {

std::int64_t checked_mul(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_mul_overflow(x, y, &r)) throw std::overflow_error("a-adic arithmetic overflow");
  return r;
}

std::int64_t ipow(std::int64_t a, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r = checked_mul(r, a);
  return r;
}

}  // namespace

AdicRational AdicRational::lattice(std::int64_t n, int m, int a) {
  if (a < 2) throw std::invalid_argument("AdicRational: a >= 2");
  AdicRational r;
  r.n_ = n;
  r.m_ = m;
  r.a_ = a;
  r.canonicalize();
  return r;
}

AdicRational AdicRational::off_lattice(double value, int a) {
  AdicRational r;
  r.a_ = a;
  r.on_lattice_ = false;
  r.off_value_ = value;
  return r;
}

void AdicRational::canonicalize() {
  if (!on_lattice_) return;
  if (n_ == 0) {
    m_ = 0;
    return;
  }
  while (n_ % a_ == 0) {
    n_ /= a_;
    --m_;
  }
}

double AdicRational::value(double b) const {
  const double unit = 2.0 * std::numbers::pi / b;
  if (!on_lattice_) return off_value_ * unit;
  return unit * static_cast<double>(n_) * std::pow(static_cast<double>(a_), -m_);
}

AdicRational AdicRational::operator-(const AdicRational& o) const {
  if (o.a_ != a_) throw std::invalid_argument("AdicRational: mismatched bases");
  if (!on_lattice_ || !o.on_lattice_) {
    const double l = on_lattice_ ? static_cast<double>(n_) * std::pow(a_, -m_) : off_value_;
    const double r = o.on_lattice_ ? static_cast<double>(o.n_) * std::pow(o.a_, -o.m_) : o.off_value_;
    // Lattice minus off-lattice stays off-lattice; two off-lattice values are
    // treated as unrelated reals.
    return off_lattice(l - r, a_);
  }
  const int top = std::max(m_, o.m_);
  const std::int64_t l = checked_mul(n_, ipow(a_, top - m_));
  const std::int64_t r = checked_mul(o.n_, ipow(a_, top - o.m_));
  std::int64_t d;
  if (__builtin_sub_overflow(l, r, &d)) throw std::overflow_error("a-adic arithmetic overflow");
  return lattice(d, top, a_);
}

AdicRational AdicRational::operator+(const AdicRational& o) const {
  if (!o.on_lattice_) return *this - off_lattice(-o.off_value_, a_);
  return *this - lattice(-o.n_, o.m_, a_);
}

AdicRational AdicRational::times_a() const {
  if (!on_lattice_) return off_lattice(off_value_ * a_, a_);
  return lattice(n_, m_ - 1, a_);
}

bool AdicRational::operator==(const AdicRational& o) const {
  if (on_lattice_ != o.on_lattice_ || a_ != o.a_) return false;
  if (!on_lattice_) return off_value_ == o.off_value_;
  return n_ == o.n_ && m_ == o.m_;
}

bool Valuation::admits(int j) const {
  switch (kind) {
    case Kind::MinusInfinity: return true;
    case Kind::PlusInfinity: return false;
    default: return j >= value;
  }
}

std::string Valuation::str() const {
  switch (kind) {
    case Kind::MinusInfinity: return "-inf";
    case Kind::PlusInfinity: return "+inf";
    default: return std::to_string(value);
  }
}

Valuation valuation(const AdicRational& lambda) {
  if (!lambda.on_lattice()) return {Valuation::Kind::PlusInfinity, 0};
  if (lambda.is_zero()) return {Valuation::Kind::MinusInfinity, 0};
  return {Valuation::Kind::Finite, lambda.a_power()};
}

bool in_dual_lattice_after_dilation(const AdicRational& lambda, int j) {
  if (!lambda.on_lattice()) return false;
  // a^j lambda = (2 pi/b) n a^{j-m}: in D iff a^{m-j} divides n.
  std::int64_t n = lambda.numerator();
  for (int e = lambda.a_power() - j; e > 0; --e) {
    if (n % lambda.base() != 0) return false;
    n /= lambda.base();
  }
  return true;
}

Complex affine_product(const AffineSystem& sys, double lambda, double lambda_prime,
                       const Valuation& kappa, std::optional<JRange> window) {
  if (kappa.kind == Valuation::Kind::PlusInfinity) return 0.0;
  if (!window) {
    if (!sys.wavelet.band_limited()) {
      throw std::invalid_argument("affine_product: non-band-limited wavelet needs a j window");
    }
    if (lambda == 0.0 || lambda_prime == 0.0) return 0.0;
    const JRange r1 = active_scales(sys, lambda);
    const JRange r2 = active_scales(sys, lambda_prime);
    window = JRange{std::max(r1.lo, r2.lo), std::min(r1.hi, r2.hi)};
  }
  Complex s(0.0, 0.0);
  for (int j = window->lo; j <= window->hi; ++j) {
    if (!kappa.admits(j)) continue;
    const double sc = sys.scale(j);
    s += sys.wavelet(sc * lambda) * std::conj(sys.wavelet(sc * lambda_prime));
  }
  return s;
}

Complex affine_product(const AffineSystem& sys, const AdicRational& lambda,
                       const AdicRational& lambda_prime, std::optional<JRange> window) {
  return affine_product(sys, lambda.value(sys.b), lambda_prime.value(sys.b),
                        valuation(lambda - lambda_prime), window);
}

std::vector<AdicRational> default_q_set(const AffineSystem& sys, int J, double q_max) {
  if (J < 0) throw std::invalid_argument("default_q_set: J >= 0");
  const double per_unit = std::pow(static_cast<double>(sys.a), J) / sys.dual_step();
  const auto top = static_cast<std::int64_t>(std::floor(q_max * per_unit + 1e-9));
  std::vector<AdicRational> q;
  for (std::int64_t n = -top; n <= top; ++n) q.push_back(AdicRational::lattice(n, J, sys.a));
  return q;
}

JRange fiber_window(const AffineSystem& sys, double lambda, const std::vector<AdicRational>& q_set) {
  JRange w{std::numeric_limits<int>::max(), std::numeric_limits<int>::min()};
  for (const auto& q : q_set) {
    const double x = lambda + q.value(sys.b);
    if (x == 0.0) continue;
    const JRange r = active_scales(sys, x);
    w.lo = std::min(w.lo, r.lo);
    w.hi = std::max(w.hi, r.hi);
  }
  if (w.lo > w.hi) return {};
  return w;
}

GramianFiber gramian_fiber(const AffineSystem& sys, double lambda, const std::vector<AdicRational>& q_set,
                           std::optional<JRange> j_window) {
  GramianFiber f;
  f.lambda = lambda;
  f.q_set = q_set;
  if (!j_window) {
    if (!sys.wavelet.band_limited()) {
      throw std::invalid_argument("gramian_fiber: non-band-limited wavelet needs a j window");
    }
    j_window = fiber_window(sys, lambda, q_set);
  }
  f.j_window = *j_window;
  const auto n = static_cast<Eigen::Index>(q_set.size());
  const int nj = std::max(0, j_window->hi - j_window->lo + 1);
  Eigen::MatrixXcd psi(nj, n);
  for (int jj = 0; jj < nj; ++jj) {
    const double sc = sys.scale(j_window->lo + jj);
    for (Eigen::Index i = 0; i < n; ++i) psi(jj, i) = sys.wavelet(sc * (lambda + q_set[i].value(sys.b)));
  }
  f.entries = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i; k < n; ++k) {
      const Valuation kappa = valuation(q_set[i] - q_set[k]);
      Complex s(0.0, 0.0);
      for (int jj = 0; jj < nj; ++jj) {
        if (kappa.admits(j_window->lo + jj)) s += psi(jj, i) * std::conj(psi(jj, k));
      }
      if (i == k) s = s.real();
      f.entries(i, k) = s;
      f.entries(k, i) = std::conj(s);
    }
  }
  return f;
}

Eigen::MatrixXcd gramian_fiber_scale(const AffineSystem& sys, double lambda,
                                     const std::vector<AdicRational>& q_set, int j) {
  const auto n = static_cast<Eigen::Index>(q_set.size());
  const double sc = sys.scale(j);
  Eigen::VectorXcd psi(n);
  for (Eigen::Index i = 0; i < n; ++i) psi[i] = sys.wavelet(sc * (lambda + q_set[i].value(sys.b)));
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (in_dual_lattice_after_dilation(q_set[i] - q_set[k], j)) g(i, k) = psi[i] * std::conj(psi[k]);
    }
  }
  return g;
}

namespace {

struct PowerResult {
  double value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = true;
};

PowerResult power_iteration(const Eigen::MatrixXcd& m, Eigen::VectorXcd v) {
  PowerResult out;
  constexpr int kMaxIter = 20000;
  v.normalize();
  double prev = std::numeric_limits<double>::quiet_NaN();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (int it = 1; it <= kMaxIter; ++it) {
    Eigen::VectorXcd w = m * v;
    const double rho = v.dot(w).real();
    out.value = rho;
    out.residual = (w - rho * v).norm();
    out.iterations = it;
    const double nw = w.norm();
    if (nw == 0.0 || out.residual <= 1e-13 * scale) return out;
    if (std::abs(rho - prev) <= 1e-16 * scale && it > 50) return out;
    prev = rho;
    v = w / nw;
  }
  out.converged = out.residual <= 1e-8 * scale;
  return out;
}

}  // namespace

RayleighBounds fiber_rayleigh_bounds(const Eigen::MatrixXcd& g, int trials, std::uint64_t seed) {
  RayleighBounds out;
  const Eigen::Index n = g.rows();
  if (n == 0) return out;
  const CounterRng rng(seed, 0);
  auto random_vector = [&](std::uint64_t which) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = rng.circular_normal(CounterRng::Kind::Probe, which * static_cast<std::uint64_t>(n) + i);
    }
    return v;
  };
  const PowerResult top = power_iteration(g, random_vector(0));
  const double sigma = std::max(top.value, 0.0);
  const Eigen::MatrixXcd shifted = sigma * Eigen::MatrixXcd::Identity(n, n) - g;
  const PowerResult bottom = power_iteration(shifted, random_vector(1));
  out.high = top.value;
  out.low = sigma - bottom.value;
  out.residual_high = top.residual;
  out.residual_low = bottom.residual;
  out.iterations = top.iterations + bottom.iterations;
  out.converged = top.converged && bottom.converged;
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXcd v = random_vector(2 + static_cast<std::uint64_t>(t));
    const double r = v.dot(g * v).real() / v.squaredNorm();
    out.high = std::max(out.high, r);
    out.low = std::min(out.low, r);
  }
  out.caveat = "bounds of the " + std::to_string(n) + "x" + std::to_string(n) +
               " truncated fiber; the infinite fiber may have wider spectrum";
  return out;
}

RayleighBounds fiber_rayleigh_bounds(const GramianFiber& fiber, int trials, std::uint64_t seed) {
  return fiber_rayleigh_bounds(fiber.entries, trials, seed);
}

FrameBounds frame_bounds_bandlimited(const AffineSystem& sys, const std::vector<double>& lambda_grid,
                                     double tol) {
  if (!sys.wavelet.band_limited()) {
    throw std::invalid_argument("frame_bounds_bandlimited: wavelet is not band-limited");
  }
  FrameBounds fb;
  fb.A = std::numeric_limits<double>::infinity();
  fb.B = 0.0;
  for (double x : lambda_grid) {
    if (x == 0.0) continue;
    const double v = littlewood_paley(sys, x).value;
    if (v < fb.A) {
      fb.A = v;
      fb.argmin = x;
    }
    if (v > fb.B) {
      fb.B = v;
      fb.argmax = x;
    }
    ++fb.grid_points;
  }
  if (fb.grid_points == 0) fb.A = 0.0;
  fb.is_frame = fb.A > tol;
  return fb;
}

std::vector<double> symmetric_log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) throw std::invalid_argument("symmetric_log_grid: bad range");
  const std::size_t half = points / 2;
  std::vector<double> pos(half);
  const double l0 = std::log(lo), l1 = std::log(hi);
  for (std::size_t i = 0; i < half; ++i) {
    pos[i] = half == 1 ? lo : std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(half - 1));
  }
  std::vector<double> grid;
  grid.reserve(2 * half);
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) grid.push_back(-*it);
  grid.insert(grid.end(), pos.begin(), pos.end());
  return grid;
}

nlohmann::json fiber_to_json(const GramianFiber& fiber, double b) {
  nlohmann::json j;
  j["lambda"] = fiber.lambda;
  j["j_window"] = {fiber.j_window.lo, fiber.j_window.hi};
  auto qs = nlohmann::json::array();
  for (const auto& q : fiber.q_set) {
    if (q.on_lattice()) {
      qs.push_back({{"n", q.numerator()}, {"m", q.a_power()}, {"value", q.value(b)}});
    } else {
      qs.push_back({{"value", q.value(b)}});
    }
  }
  j["q_set"] = qs;
  auto re = nlohmann::json::array();
  auto im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < fiber.entries.rows(); ++i) {
    std::vector<double> r, m;
    for (Eigen::Index k = 0; k < fiber.entries.cols(); ++k) {
      r.push_back(fiber.entries(i, k).real());
      m.push_back(fiber.entries(i, k).imag());
    }
    re.push_back(r);
    im.push_back(m);
  }
  j["entries_re"] = re;
  j["entries_im"] = im;
  return j;
}

}  // namespace apframe
