#include "apframe/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace apframe {

namespace {

constexpr double kSymmetryTol = 1e-12;

// int_0^1 (1 - u) e^{i theta u} du
Complex phi0(double theta) {
  if (std::abs(theta) < 1e-3) {
    Complex term(1.0, 0.0);
    Complex sum(0.0, 0.0);
    const Complex it(0.0, theta);
    double fact = 1.0;
    for (int n = 0; n < 8; ++n) {
      if (n > 0) {
        term *= it;
        fact *= n;
      }
      sum += term / (fact * (n + 1) * (n + 2));
    }
    return sum;
  }
  return Complex(0.0, 1.0 / theta) + (1.0 - std::polar(1.0, theta)) / (theta * theta);
}

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// x1^q - x0^q for 0 <= x0 <= x1, accurate when the cell is short.
double power_difference(double x0, double x1, double q) {
  if (x0 <= 0.0) return std::pow(x1, q);
  return std::pow(x0, q) * std::expm1(q * std::log1p((x1 - x0) / x0));
}

// int_{x0}^{x1} |x|^p (f0 + (f1 - f0)(x - x0)/(x1 - x0)) dx on one side of 0.
double linear_power_integral(double x0, double x1, double f0, double f1, double p) {
  if (x1 <= x0) return 0.0;
  if (x1 <= 0.0) return linear_power_integral(-x1, -x0, f1, f0, p);
  const double slope = (f1 - f0) / (x1 - x0);
  const double intercept = f0 - slope * x0;
  return intercept * power_difference(x0, x1, p + 1.0) / (p + 1.0) +
         slope * power_difference(x0, x1, p + 2.0) / (p + 2.0);
}

bool atoms_symmetric(const std::vector<SpectralAtom>& atoms) {
  for (const auto& at : atoms) {
    if (at.lambda == 0.0) continue;
    bool found = false;
    for (const auto& other : atoms) {
      const double scale = std::max(1.0, std::abs(at.lambda));
      if (std::abs(other.lambda + at.lambda) <= kSymmetryTol * scale &&
          std::abs(other.mass - at.mass) <= kSymmetryTol * std::max(1.0, at.mass)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

bool density_symmetric(const DensityGrid& g) {
  const double scale = std::max(1.0, std::abs(g.grid_max));
  if (std::abs(g.grid_min + g.grid_max) > kSymmetryTol * scale) return false;
  const Eigen::Index n = g.nodes();
  const double vmax = std::max(1.0, g.values.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    if (std::abs(g.values[i] - g.values[n - 1 - i]) > kSymmetryTol * vmax) return false;
  }
  return true;
}

}  // namespace

double DensityGrid::evaluate(double lambda) const {
  if (!(lambda >= grid_min && lambda <= grid_max)) return 0.0;
  const double h = step();
  const double s = (lambda - grid_min) / h;
  Eigen::Index i = static_cast<Eigen::Index>(std::floor(s));
  if (i >= nodes() - 1) return values[nodes() - 1];
  if (i < 0) i = 0;
  const double t = s - static_cast<double>(i);
  return (1.0 - t) * values[i] + t * values[i + 1];
}

double DensityGrid::mass() const {
  if (nodes() < 2) return 0.0;
  return step() * (values.sum() - 0.5 * (values[0] + values[nodes() - 1]));
}

double DensityGrid::integral(double a, double b) const {
  a = std::max(a, grid_min);
  b = std::min(b, grid_max);
  if (!(b > a)) return 0.0;
  const double h = step();
  const Eigen::Index first = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::floor((a - grid_min) / h)), 0, nodes() - 2);
  double total = 0.0;
  for (Eigen::Index i = first; i + 1 < nodes(); ++i) {
    const double x0 = std::max(node(i), a);
    const double x1 = std::min(node(i + 1), b);
    if (x0 >= b) break;
    if (x1 > x0) total += 0.5 * (x1 - x0) * (evaluate(x0) + evaluate(x1));
  }
  return total;
}

DensityFamily DensityFamily::matern(double beta, double mass) {
  if (!(beta > 0.5)) throw std::invalid_argument("matern family needs beta > 1/2");
  DensityFamily f;
  f.kind = Kind::Matern;
  f.beta = beta;
  f.mass = mass;
  return f;
}

DensityFamily DensityFamily::band(double lo, double hi, double mass) {
  if (!(lo >= 0.0 && hi > lo)) throw std::invalid_argument("band family needs 0 <= lo < hi");
  DensityFamily f;
  f.kind = Kind::Band;
  f.lo = lo;
  f.hi = hi;
  f.mass = mass;
  return f;
}

double DensityFamily::density(double lambda) const {
  const double x = std::abs(lambda);
  if (kind == Kind::Band) {
    return (x >= lo && x <= hi) ? mass / (2.0 * (hi - lo)) : 0.0;
  }
  const double c = std::exp(std::lgamma(beta) - std::lgamma(beta - 0.5)) / std::sqrt(std::numbers::pi);
  return mass * c * std::exp(-beta * std::log1p(x * x));
}

Complex DensityFamily::covariance(double tau) const {
  const double t = std::abs(tau);
  if (kind == Kind::Band) {
    if (t == 0.0) return mass;
    return mass * (std::sin(hi * t) - std::sin(lo * t)) / ((hi - lo) * t);
  }
  if (t == 0.0) return mass;
  // (2 / Gamma(nu)) (t/2)^nu K_nu(t), nu = beta - 1/2, equals 1 at t = 0.
  const double nu = beta - 0.5;
  const double log_pref = std::log(2.0) - std::lgamma(nu) + nu * std::log(0.5 * t);
  return mass * std::exp(log_pref) * std::cyl_bessel_k(nu, t);
}

double DensityFamily::support_max() const {
  return kind == Kind::Band ? hi : std::numeric_limits<double>::infinity();
}

std::vector<double> DensityFamily::breakpoints() const {
  if (kind == Kind::Band) return {lo, hi};
  return {};
}

std::string DensityFamily::name() const {
  if (kind == Kind::Band) return "band";
  return "matern";
}

DensityGrid DensityFamily::tabulate(double grid_max, Eigen::Index nodes) const {
  if (!(grid_max > 0.0) || nodes < 2) throw std::invalid_argument("tabulate: bad grid");
  DensityGrid g;
  g.grid_min = -grid_max;
  g.grid_max = grid_max;
  g.values.resize(nodes);
  for (Eigen::Index i = 0; i < nodes; ++i) g.values[i] = density(g.node(i));
  // Make the table exactly palindromic so symmetry survives rounding of the nodes.
  for (Eigen::Index i = 0; i < nodes / 2; ++i) g.values[nodes - 1 - i] = g.values[i];
  return g;
}

SpectralMeasure::SpectralMeasure(std::vector<SpectralAtom> atoms,
                                 std::optional<DensityGrid> density, bool symmetric,
                                 std::optional<DensityFamily> family)
    : atoms_(std::move(atoms)),
      density_(std::move(density)),
      family_(std::move(family)),
      symmetric_(symmetric) {
  for (const auto& at : atoms_) {
    if (!std::isfinite(at.lambda) || !std::isfinite(at.mass) || at.mass < 0.0) {
      throw std::invalid_argument("spectral atom needs finite location and finite mass >= 0");
    }
  }
  std::sort(atoms_.begin(), atoms_.end(),
            [](const SpectralAtom& l, const SpectralAtom& r) { return l.lambda < r.lambda; });
  for (std::size_t i = 1; i < atoms_.size(); ++i) {
    if (atoms_[i].lambda == atoms_[i - 1].lambda) {
      throw std::invalid_argument("spectral atoms must have distinct locations");
    }
  }
  if (density_) {
    const auto& g = *density_;
    if (g.nodes() < 2 || !(g.grid_max > g.grid_min) || !std::isfinite(g.grid_min) ||
        !std::isfinite(g.grid_max)) {
      throw std::invalid_argument("density grid needs two or more nodes on a finite interval");
    }
    for (Eigen::Index i = 0; i < g.nodes(); ++i) {
      if (!std::isfinite(g.values[i]) || g.values[i] < 0.0) {
        throw std::invalid_argument("density values must be finite and nonnegative");
      }
    }
  }
  if (symmetric_) {
    if (!atoms_symmetric(atoms_)) throw std::invalid_argument("declared symmetric, atoms are not");
    if (density_ && !density_symmetric(*density_)) {
      throw std::invalid_argument("declared symmetric, density is not");
    }
  }
  total_mass_ = atom_mass() + density_mass();
}

SpectralMeasure SpectralMeasure::from_family(const DensityFamily& family, double grid_max,
                                             Eigen::Index nodes, std::vector<SpectralAtom> atoms) {
  const bool sym = atoms_symmetric(atoms);
  return SpectralMeasure(std::move(atoms), family.tabulate(grid_max, nodes), sym, family);
}

double SpectralMeasure::atom_mass() const {
  double m = 0.0;
  for (const auto& at : atoms_) m += at.mass;
  return m;
}

double SpectralMeasure::density_mass() const { return density_ ? density_->mass() : 0.0; }

double SpectralMeasure::support_max() const {
  double m = 0.0;
  for (const auto& at : atoms_) {
    if (at.mass > 0.0) m = std::max(m, std::abs(at.lambda));
  }
  if (density_) {
    const auto& g = *density_;
    for (Eigen::Index i = 0; i < g.nodes(); ++i) {
      if (g.values[i] > 0.0) {
        // Positive node values spread to the neighbouring cells.
        const double lo = g.node(std::max<Eigen::Index>(i - 1, 0));
        const double hi = g.node(std::min<Eigen::Index>(i + 1, g.nodes() - 1));
        m = std::max({m, std::abs(lo), std::abs(hi)});
      }
    }
  }
  return m;
}

double SpectralMeasure::truncation_bound() const {
  if (!density_) return 0.0;
  return std::max(std::abs(density_->grid_min), std::abs(density_->grid_max));
}

bool SpectralMeasure::has_atom_at(double lambda) const {
  return std::any_of(atoms_.begin(), atoms_.end(),
                     [&](const SpectralAtom& a) { return a.lambda == lambda; });
}

Complex density_covariance(const DensityGrid& g, double tau) {
  const double h = g.step();
  const double theta = tau * h;
  const double interior = sinc(0.5 * theta) * sinc(0.5 * theta);
  const Eigen::Index n = g.nodes();
  Complex acc(0.0, 0.0);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (g.values[i] != 0.0) acc += g.values[i] * std::polar(1.0, tau * g.node(i));
  }
  acc *= interior;
  const Complex p0 = phi0(theta);
  acc += g.values[0] * std::polar(1.0, tau * g.grid_min) * p0;
  acc += g.values[n - 1] * std::polar(1.0, tau * g.grid_max) * std::conj(p0);
  return h * acc;
}

Complex covariance(const SpectralMeasure& mu, double tau) {
  Complex r(0.0, 0.0);
  for (const auto& at : mu.atoms()) r += at.mass * std::polar(1.0, at.lambda * tau);
  if (mu.density()) r += density_covariance(*mu.density(), tau);
  return r;
}

double truncated_moment(const SpectralMeasure& mu, double alpha, double bound) {
  const double p = 2.0 * alpha;
  double m = 0.0;
  for (const auto& at : mu.atoms()) {
    if (std::abs(at.lambda) <= bound && at.lambda != 0.0) {
      m += at.mass * std::pow(std::abs(at.lambda), p);
    }
  }
  if (mu.density()) {
    const auto& g = *mu.density();
    for (Eigen::Index i = 0; i + 1 < g.nodes(); ++i) {
      double x0 = g.node(i);
      double x1 = g.node(i + 1);
      if (x1 <= -bound || x0 >= bound) continue;
      double f0 = g.values[i];
      double f1 = g.values[i + 1];
      if (f0 == 0.0 && f1 == 0.0) continue;
      const double c0 = std::max(x0, -bound);
      const double c1 = std::min(x1, bound);
      const double e0 = g.evaluate(c0);
      const double e1 = g.evaluate(c1);
      x0 = c0;
      x1 = c1;
      f0 = e0;
      f1 = e1;
      if (x0 < 0.0 && x1 > 0.0) {
        const double fz = g.evaluate(0.0);
        m += linear_power_integral(x0, 0.0, f0, fz, p) + linear_power_integral(0.0, x1, fz, f1, p);
      } else {
        m += linear_power_integral(x0, x1, f0, f1, p);
      }
    }
  }
  return m;
}

double family_moment(const DensityFamily& family, double alpha, double bound) {
  const double p = 2.0 * alpha;
  auto f = [p](double x) { return std::pow(x, p); };
  return 2.0 * integrate_family<double>(family, f, 0.0, bound);
}

MomentResult spectral_moment(const SpectralMeasure& mu, double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("spectral_moment: alpha in (0, 2]");
  MomentResult out;
  out.value = truncated_moment(mu, alpha, std::numeric_limits<double>::infinity());
  std::vector<double> bounds, partials;
  if (mu.family()) {
    // Regenerate the family at each bound; partials accumulate dyadic shells
    // so every increment is an independently converged integral.
    const auto& fam = *mu.family();
    const double p = 2.0 * alpha;
    auto f = [p](double x) { return std::pow(x, p); };
    double lo = 0.0;
    double acc = 0.0;
    for (int k = 0; k <= 20; ++k) {
      const double hi = 8.0 * std::ldexp(1.0, k);
      acc += 2.0 * integrate_family<double>(fam, f, lo, hi);
      double atoms = 0.0;
      for (const auto& at : mu.atoms()) {
        if (std::abs(at.lambda) <= hi && at.lambda != 0.0) {
          atoms += at.mass * std::pow(std::abs(at.lambda), p);
        }
      }
      bounds.push_back(hi);
      partials.push_back(acc + atoms);
      lo = hi;
    }
  } else {
    const double top = std::max(mu.support_max(), 1.0);
    for (int k = -12; k <= 6; ++k) {
      const double b = top * std::ldexp(1.0, k);
      bounds.push_back(b);
      partials.push_back(truncated_moment(mu, alpha, b));
    }
  }
  out.diagnostic = assess_growth(std::move(bounds), std::move(partials));
  return out;
}

Decomposition decompose(const SpectralMeasure& mu) {
  return {SpectralMeasure({}, mu.density(), mu.declared_symmetric(), mu.family()),
          SpectralMeasure(mu.atoms(), std::nullopt, mu.declared_symmetric())};
}

SpectralMeasure filter_measure(const SpectralMeasure& mu, const FrequencyResponse& f) {
  std::vector<SpectralAtom> atoms;
  for (const auto& at : mu.atoms()) {
    const Complex v = f(at.lambda);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw std::domain_error("filter response is not finite at atom " + std::to_string(at.lambda));
    }
    atoms.push_back({at.lambda, at.mass * std::norm(v)});
  }
  std::optional<DensityGrid> dens;
  if (mu.density()) {
    DensityGrid g = *mu.density();
    for (Eigen::Index i = 0; i < g.nodes(); ++i) {
      const Complex v = f(g.node(i));
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw std::domain_error("filter response is not finite at grid node " +
                                std::to_string(g.node(i)));
      }
      g.values[i] *= std::norm(v);
    }
    dens = std::move(g);
  }
  return SpectralMeasure(std::move(atoms), std::move(dens), false);
}

FrequencyResponse continuous_carrier(const SpectralMeasure& mu) {
  std::vector<double> locs;
  for (const auto& at : mu.atoms()) locs.push_back(at.lambda);
  return [locs](double lambda) -> Complex {
    return std::find(locs.begin(), locs.end(), lambda) == locs.end() ? 1.0 : 0.0;
  };
}

namespace {

constexpr int kSeriesTerms = 14;

// int lambda^{2k} rho over the piecewise-linear interpolant, k < kSeriesTerms.
std::vector<double> density_even_moments(const DensityGrid& g) {
  std::vector<double> m(kSeriesTerms, 0.0);
  for (Eigen::Index i = 0; i + 1 < g.nodes(); ++i) {
    const double x0 = g.node(i), x1 = g.node(i + 1), y0 = g.values[i], y1 = g.values[i + 1];
    if (y0 == 0.0 && y1 == 0.0) continue;
    const double h = x1 - x0;
    double p0 = x0, p1 = x1;  // x^{n+1}
    for (int n = 0; n < 2 * kSeriesTerms; ++n) {
      const double in = (p1 - p0) / (n + 1.0);
      const double in1 = (p1 * x1 - p0 * x0) / (n + 2.0);
      if (n % 2 == 0) m[n / 2] += (y0 * (x1 * in - in1) + y1 * (in1 - x0 * in)) / h;
      p0 *= x0;
      p1 *= x1;
    }
  }
  return m;
}

// sum_{k >= first} (-1)^{k+1} c_k x^{2k} M_k / (2k)!, c_k from `coef`.
template <class C>
double moment_series(const std::vector<double>& moments, double x, int first, const C& coef) {
  double s = 0.0, pw = 1.0, fact = 1.0;
  for (int k = 0; k < static_cast<int>(moments.size()); ++k) {
    if (k > 0) {
      pw *= x * x;
      fact *= (2.0 * k - 1.0) * (2.0 * k);
    }
    if (k < first) continue;
    s += ((k % 2 == 1) ? 1.0 : -1.0) * coef(k) * pw * moments[k] / fact;
  }
  return s;
}

}  // namespace

Covariance::Covariance(SpectralMeasure mu, bool prefer_family)
    : mu_(std::move(mu)), use_family_(prefer_family && mu_.family().has_value()) {
  r0_ = use_family_ ? mu_.atom_mass() + mu_.family()->mass : mu_.total_mass();
  if (use_family_) {
    const auto& f = *mu_.family();
    if (f.kind == DensityFamily::Kind::Band) {
      reach_ = f.hi;
      for (int k = 0; k < kSeriesTerms; ++k) {
        const double e = 2.0 * k + 1.0;
        even_moments_.push_back(f.mass * (std::pow(f.hi, e) - std::pow(f.lo, e)) / (e * (f.hi - f.lo)));
      }
    }
  } else if (mu_.density()) {
    const auto& g = *mu_.density();
    reach_ = std::max(std::abs(g.grid_min), std::abs(g.grid_max));
    even_moments_ = density_even_moments(g);
  }
}

Complex Covariance::operator()(double tau) const {
  if (tau == 0.0) return r0_;
  if (!use_family_) return covariance(mu_, tau);
  Complex r = mu_.family()->covariance(tau);
  for (const auto& at : mu_.atoms()) r += at.mass * std::polar(1.0, at.lambda * tau);
  return r;
}

Complex Covariance::smooth_increment(double tau) const {
  const Complex c = use_family_ ? mu_.family()->covariance(tau) : density_covariance(*mu_.density(), tau);
  if (!even_moments_.empty() && std::abs(tau) * reach_ <= 1.0) {
    // 1 - cos x = sum_{k >= 1} (-1)^{k+1} x^{2k} / (2k)!
    return {moment_series(even_moments_, tau, 1, [](int) { return 1.0; }), -c.imag()};
  }
  const double base = use_family_ ? mu_.family()->mass : mu_.density()->mass();
  return base - c;
}

Complex Covariance::increment(double tau) const {
  Complex r(0.0, 0.0);
  for (const auto& at : mu_.atoms()) {
    const double x = at.lambda * tau;
    const double s = std::sin(0.5 * x);
    r += at.mass * Complex(2.0 * s * s, -std::sin(x));
  }
  if (use_family_ || mu_.density()) r += smooth_increment(tau);
  return r;
}

double Covariance::second_difference(double h) const {
  double v = 0.0;
  for (const auto& at : mu_.atoms()) {
    const double s = std::sin(0.5 * h * at.lambda);
    v += 16.0 * at.mass * s * s * s * s;
  }
  if (!use_family_ && !mu_.density()) return v;
  if (!even_moments_.empty() && std::abs(h) * reach_ <= 0.5) {
    // 6 - 8 cos x + 2 cos 2x = sum_{k >= 2} (-1)^k (2 * 4^k - 8) x^{2k} / (2k)!
    return v - moment_series(even_moments_, h, 2, [](int k) { return 2.0 * std::ldexp(1.0, 2 * k) - 8.0; });
  }
  return v + 8.0 * smooth_increment(h).real() - 2.0 * smooth_increment(2.0 * h).real();
}

void to_json(nlohmann::json& j, const DensityFamily& fam) {
  j = nlohmann::json::object();
  j["kind"] = fam.name();
  if (fam.kind == DensityFamily::Kind::Matern) {
    j["beta"] = fam.beta;
  } else {
    j["lo"] = fam.lo;
    j["hi"] = fam.hi;
  }
  j["mass"] = fam.mass;
}

DensityFamily family_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const double mass = j.value("mass", 1.0);
  if (kind == "matern") return DensityFamily::matern(j.at("beta").get<double>(), mass);
  if (kind == "band") return DensityFamily::band(j.at("lo").get<double>(), j.at("hi").get<double>(), mass);
  throw std::invalid_argument("unknown density family '" + kind + "'");
}

void to_json(nlohmann::json& j, const SpectralMeasure& mu) {
  j = nlohmann::json::object();
  auto atoms = nlohmann::json::array();
  for (const auto& at : mu.atoms()) atoms.push_back({{"lambda", at.lambda}, {"mass", at.mass}});
  j["atoms"] = atoms;
  if (mu.density()) {
    const auto& g = *mu.density();
    std::vector<double> v(g.values.data(), g.values.data() + g.values.size());
    j["density"] = {{"grid_min", g.grid_min}, {"grid_max", g.grid_max}, {"values", v}};
  }
  j["symmetric"] = mu.declared_symmetric();
  if (mu.family()) j["family"] = *mu.family();
}

SpectralMeasure measure_from_json(const nlohmann::json& j) {
  std::vector<SpectralAtom> atoms;
  if (j.contains("atoms")) {
    for (const auto& a : j.at("atoms")) {
      atoms.push_back({a.at("lambda").get<double>(), a.at("mass").get<double>()});
    }
  }
  std::optional<DensityFamily> fam;
  if (j.contains("family")) fam = family_from_json(j.at("family"));
  std::optional<DensityGrid> dens;
  if (j.contains("density")) {
    const auto& d = j.at("density");
    DensityGrid g;
    g.grid_min = d.at("grid_min").get<double>();
    g.grid_max = d.at("grid_max").get<double>();
    const auto v = d.at("values").get<std::vector<double>>();
    g.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    dens = std::move(g);
  } else if (fam) {
    const auto& f = j.at("family");
    dens = fam->tabulate(f.at("grid_max").get<double>(), f.at("nodes").get<Eigen::Index>());
  }
  const bool sym = j.value("symmetric", false);
  return SpectralMeasure(std::move(atoms), std::move(dens), sym, std::move(fam));
}

}  // namespace apframe
