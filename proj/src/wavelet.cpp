#include "apframe/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace apframe {

namespace {

constexpr double kPi = std::numbers::pi;

double meyer_nu(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double x4 = x * x * x * x;
  return x4 * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x * x * x);
}

}  // namespace

MotherWavelet::MotherWavelet(std::string name, Evaluator psi_hat, std::optional<Band> band,
                             std::optional<double> c1_bound, std::optional<DecayCertificate> decay)
    : name_(std::move(name)),
      psi_hat_(std::move(psi_hat)),
      band_(band),
      c1_bound_(c1_bound),
      decay_(decay) {
  if (!psi_hat_) throw std::invalid_argument("wavelet '" + name_ + "' has no evaluator");
  if (band_) {
    if (!(band_->lo > 0.0 && band_->hi > band_->lo)) {
      throw std::invalid_argument("wavelet band needs 0 < lo < hi");
    }
    // Sampled check that psi^ vanishes off the declared band.
    constexpr int n = 512;
    for (int i = 0; i < n; ++i) {
      const double inner = band_->lo * (i + 0.5) / n;
      const double outer = band_->hi * (1.0 + 3.0 * (i + 1.0) / n);
      for (double x : {inner, -inner, outer, -outer}) {
        if (std::abs(psi_hat_(x)) > 1e-12) {
          throw std::invalid_argument("wavelet '" + name_ + "' is nonzero off its declared band at " +
                                      std::to_string(x));
        }
      }
    }
  }
}

MotherWavelet MotherWavelet::shannon(double lo, double hi) {
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("shannon band needs 0 < lo < hi");
  auto f = [lo, hi](double x) -> Complex {
    return ((x >= lo && x < hi) || (x >= -hi && x < -lo)) ? 1.0 : 0.0;
  };
  return MotherWavelet("shannon", f, Band{lo, hi});
}

MotherWavelet MotherWavelet::meyer() {
  auto f = [](double x) -> Complex {
    const double ax = std::abs(x);
    if (ax <= 2.0 * kPi / 3.0 || ax >= 8.0 * kPi / 3.0) return 0.0;
    const Complex phase = std::polar(1.0, 0.5 * x);
    if (ax <= 4.0 * kPi / 3.0) {
      return phase * std::sin(0.5 * kPi * meyer_nu(3.0 * ax / (2.0 * kPi) - 1.0));
    }
    return phase * std::cos(0.5 * kPi * meyer_nu(3.0 * ax / (4.0 * kPi) - 1.0));
  };
  return MotherWavelet("meyer", f, Band{2.0 * kPi / 3.0, 8.0 * kPi / 3.0});
}

MotherWavelet MotherWavelet::tabulated(std::vector<double> grid, std::vector<Complex> values,
                                       std::optional<Band> band) {
  if (grid.size() < 2 || grid.size() != values.size()) {
    throw std::invalid_argument("tabulated wavelet needs matching grid and values (>= 2 points)");
  }
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw std::invalid_argument("tabulated wavelet grid must be strictly increasing");
  }
  for (const auto& v : values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::invalid_argument("tabulated wavelet values must be finite");
    }
  }
  auto f = [grid = std::move(grid), values = std::move(values)](double x) -> Complex {
    if (x == 0.0 || x < grid.front() || x > grid.back()) return 0.0;
    const auto it = std::upper_bound(grid.begin(), grid.end(), x);
    if (it == grid.end()) return values.back();
    const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
    const double t = (x - grid[i]) / (grid[i + 1] - grid[i]);
    return (1.0 - t) * values[i] + t * values[i + 1];
  };
  return MotherWavelet("tabulated", f, band);
}

MotherWavelet MotherWavelet::zero() {
  return MotherWavelet("zero", [](double) -> Complex { return 0.0; });
}

Complex MotherWavelet::operator()(double lambda) const {
  if (lambda == 0.0) return 0.0;
  return psi_hat_(lambda);
}

MotherWavelet MotherWavelet::scaled(Complex c) const {
  auto f = [inner = psi_hat_, c](double x) { return c * inner(x); };
  std::optional<double> c1;
  if (c1_bound_) c1 = *c1_bound_ * std::norm(c);
  std::optional<DecayCertificate> dec = decay_;
  if (dec) dec->constant *= std::abs(c);
  std::optional<Band> band = band_;
  if (c == Complex(0.0, 0.0)) band.reset();
  return MotherWavelet(name_, f, band, c1, dec);
}

MotherWavelet MotherWavelet::with_decay(DecayCertificate cert) const {
  return MotherWavelet(name_, psi_hat_, band_, c1_bound_, cert);
}

AffineSystem::AffineSystem(MotherWavelet w, int a_, double b_) : wavelet(std::move(w)), a(a_), b(b_) {
  if (a < 2) throw std::invalid_argument("affine system needs integer a >= 2");
  if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("affine system needs b > 0");
}

double AffineSystem::dual_step() const { return 2.0 * kPi / b; }

double AffineSystem::scale(int j) const { return std::pow(static_cast<double>(a), j); }

Complex psi_jk_hat(const AffineSystem& sys, int j, double k, double lambda, Normalization norm) {
  const double n = k / sys.b;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, std::abs(n))) {
    throw std::invalid_argument("psi_jk_hat: k is not in the lattice bZ");
  }
  const double s = sys.scale(j);
  const double x = s * lambda;
  Complex v = sys.wavelet(x) * std::polar(1.0, -k * x);
  if (norm == Normalization::L2) v *= std::sqrt(s);
  return v;
}

MotherWavelet riesz_potential(const MotherWavelet& w, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("riesz_potential: alpha in (0, 1)");
  if (!w.band_limited()) {
    bool bounded = w.decay() && w.decay()->q >= alpha;
    if (!w.decay()) {
      // Probe toward 0: |lambda|^{-alpha}|psi^| must not grow.
      double prev = 0.0;
      bounded = true;
      for (int k = 3; k <= 12; ++k) {
        const double x = std::pow(10.0, -k);
        const double v = std::max(std::abs(w(x)), std::abs(w(-x))) * std::pow(x, -alpha);
        if (k > 3 && v > 2.0 * prev && v > 1e-12) bounded = false;
        prev = v;
      }
    }
    if (!bounded) {
      throw std::domain_error("riesz_potential: |lambda|^{-alpha} psi^ is unbounded near 0 for '" +
                              w.name() + "'");
    }
  }
  auto f = [w, alpha](double x) -> Complex {
    if (x == 0.0) return 0.0;
    return std::pow(std::abs(x), -alpha) * w(x);
  };
  std::optional<DecayCertificate> dec = w.decay();
  if (dec) {
    dec->q -= alpha;
    dec->p += alpha;
  }
  return MotherWavelet("riesz(" + w.name() + ")", f, w.band(), std::nullopt, dec);
}

double gamma_constant(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("gamma_constant: alpha in (0, 1)");
  return std::sqrt(kPi) * std::exp2(alpha) * std::tgamma(0.5 * alpha) / std::tgamma(0.5 * (1.0 - alpha));
}

JRange active_scales(const AffineSystem& sys, double lambda) {
  const auto& band = sys.wavelet.band();
  if (!band) throw std::invalid_argument("active_scales: wavelet is not band-limited");
  const double x = std::abs(lambda);
  if (x == 0.0) return {};
  const double la = std::log(static_cast<double>(sys.a));
  JRange r;
  r.lo = static_cast<int>(std::floor(std::log(band->lo / x) / la));
  r.hi = static_cast<int>(std::ceil(std::log(band->hi / x) / la));
  return r;
}

LittlewoodPaley littlewood_paley(const AffineSystem& sys, double lambda, std::optional<JRange> range) {
  LittlewoodPaley out;
  if (lambda == 0.0) return out;
  if (!range) {
    if (!sys.wavelet.band_limited()) {
      throw std::invalid_argument("littlewood_paley: non-band-limited wavelet needs an explicit j range");
    }
    range = active_scales(sys, lambda);
  }
  out.range = *range;
  for (int j = range->lo; j <= range->hi; ++j) out.value += std::norm(sys.wavelet(sys.scale(j) * lambda));
  if (!sys.wavelet.band_limited()) {
    const auto& dec = sys.wavelet.decay();
    if (!dec) {
      out.tail_bound = std::numeric_limits<double>::infinity();
    } else {
      const double a = sys.a;
      const double c2 = dec->constant * dec->constant;
      const double x = std::abs(lambda);
      const double below = c2 * std::pow(sys.scale(range->lo - 1) * x, 2.0 * dec->q) /
                           (1.0 - std::pow(a, -2.0 * dec->q));
      const double above = c2 * std::pow(sys.scale(range->hi + 1) * x, -2.0 * dec->p) /
                           (1.0 - std::pow(a, -2.0 * dec->p));
      out.tail_bound = below + above;
    }
  }
  return out;
}

C1Supremum c1_supremum(const AffineSystem& sys, int j, int grid_points,
                       std::optional<std::pair<int, int>> d_range) {
  if (grid_points < 1) throw std::invalid_argument("c1_supremum: need grid points");
  const double step = sys.dual_step();
  const double s = sys.scale(j);
  if (!d_range && !sys.wavelet.band_limited()) {
    throw std::invalid_argument("c1_supremum: non-band-limited wavelet needs an explicit d range");
  }
  C1Supremum out;
  for (int i = 0; i < grid_points; ++i) {
    const double lambda = (i + 0.5) * step / grid_points;
    int n0, n1;
    if (d_range) {
      n0 = d_range->first;
      n1 = d_range->second;
    } else {
      const double reach = sys.wavelet.band()->hi / s;
      n0 = static_cast<int>(std::ceil((-reach - lambda) / step));
      n1 = static_cast<int>(std::floor((reach - lambda) / step));
    }
    double sum = 0.0;
    for (int n = n0; n <= n1; ++n) sum += std::norm(sys.wavelet(s * (lambda + n * step)));
    if (sum > out.value || i == 0) {
      out.value = sum;
      out.argmax = lambda;
    }
  }
  if (sys.wavelet.c1_bound()) out.within_bound = out.value <= *sys.wavelet.c1_bound();
  return out;
}

MotherWavelet wavelet_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name")) throw std::invalid_argument("wavelet: missing 'name'");
  const std::string name = j.at("name").get<std::string>();
  std::optional<MotherWavelet> w;
  if (name == "shannon") {
    double lo = kPi, hi = 2.0 * kPi;
    if (j.contains("band")) {
      lo = j.at("band").at(0).get<double>();
      hi = j.at("band").at(1).get<double>();
    }
    w = MotherWavelet::shannon(lo, hi);
  } else if (name == "meyer") {
    w = MotherWavelet::meyer();
  } else if (name == "zero") {
    w = MotherWavelet::zero();
  } else if (name == "tabulated") {
    auto grid = j.at("grid").get<std::vector<double>>();
    auto re = j.at("re").get<std::vector<double>>();
    std::vector<double> im(re.size(), 0.0);
    if (j.contains("im")) im = j.at("im").get<std::vector<double>>();
    if (im.size() != re.size()) throw std::invalid_argument("wavelet: 're' and 'im' lengths differ");
    std::vector<Complex> vals;
    for (std::size_t i = 0; i < re.size(); ++i) vals.emplace_back(re[i], im[i]);
    std::optional<Band> band;
    if (j.contains("band")) band = Band{j.at("band").at(0).get<double>(), j.at("band").at(1).get<double>()};
    w = MotherWavelet::tabulated(std::move(grid), std::move(vals), band);
  } else {
    throw std::invalid_argument("wavelet: unknown name '" + name + "'");
  }
  if (j.contains("c1_bound")) {
    const double m = j.at("c1_bound").get<double>();
    w = MotherWavelet(w->name(), [v = *w](double x) { return v(x); }, w->band(), m, w->decay());
  }
  if (j.contains("decay")) {
    const auto& d = j.at("decay");
    w = w->with_decay({d.value("C", 1.0), d.at("p").get<double>(), d.value("q", 1.0)});
  }
  if (j.contains("scale")) w = w->scaled(j.at("scale").get<double>());
  return *w;
}

}  // namespace apframe
