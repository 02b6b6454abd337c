#include "apframe/process.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace apframe {

namespace {

constexpr Eigen::Index kReanchor = 256;

Complex checked_weight(const FrequencyResponse& w, double lambda) {
  if (!w) return 1.0;
  const Complex v = w(lambda);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    throw std::domain_error("frequency weight is not finite at lambda = " + std::to_string(lambda));
  }
  return v;
}

// sin(x) - x without cancellation for small x.
double sin_minus_x(double x) {
  if (std::abs(x) > 0.5) return std::sin(x) - x;
  const double x2 = x * x;
  double term = -x * x2 / 6.0;
  double sum = term;
  for (int n = 2; n < 12; ++n) {
    term *= -x2 / ((2.0 * n) * (2.0 * n + 1.0));
    sum += term;
  }
  return sum;
}

}  // namespace

Complex TrigSum::operator()(double t) const {
  Complex s(0.0, 0.0);
  for (std::size_t n = 0; n < freq.size(); ++n) s += coeff[n] * std::polar(1.0, freq[n] * t);
  return s;
}

Eigen::VectorXcd TrigSum::evaluate(const std::vector<double>& times) const {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(times.size()));
  for (std::size_t i = 0; i < times.size(); ++i) out[static_cast<Eigen::Index>(i)] = (*this)(times[i]);
  return out;
}

Eigen::VectorXcd TrigSum::evaluate_uniform(double t0, double dt, Eigen::Index count) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(count);
  for (std::size_t n = 0; n < freq.size(); ++n) {
    const double lam = freq[n];
    const Complex c = coeff[n];
    if (c == Complex(0.0, 0.0)) continue;
    const Complex step = std::polar(1.0, lam * dt);
    for (Eigen::Index k0 = 0; k0 < count; k0 += kReanchor) {
      Complex z = c * std::polar(1.0, lam * (t0 + static_cast<double>(k0) * dt));
      const Eigen::Index k1 = std::min(count, k0 + kReanchor);
      for (Eigen::Index k = k0; k < k1; ++k) {
        out[k] += z;
        z *= step;
      }
    }
  }
  return out;
}

RandomSpectrum draw_spectrum(const SpectralMeasure& mu, std::uint64_t seed,
                             std::uint64_t stream_id, const SynthesisOptions& opt) {
  RandomSpectrum rs;
  rs.seed = seed;
  rs.stream_id = stream_id;
  rs.mode = opt.mode;
  const CounterRng rng(seed, stream_id);
  const bool real = opt.mode == ProcessMode::Real;
  if (real && !mu.declared_symmetric()) {
    throw std::invalid_argument("real process mode needs a measure declared symmetric");
  }

  const auto& atoms = mu.atoms();
  const std::size_t na = atoms.size();
  rs.atom_lambda.resize(na);
  rs.atom_coeff.resize(na);
  for (std::size_t i = 0; i < na; ++i) {
    rs.atom_lambda[i] = atoms[i].lambda;
    const double s = std::sqrt(atoms[i].mass);
    if (!real) {
      rs.atom_coeff[i] = s * rng.circular_normal(CounterRng::Kind::Atom, i);
    } else if (atoms[i].lambda == 0.0) {
      rs.atom_coeff[i] = s * rng.normal(CounterRng::Kind::Atom, i);
    } else if (atoms[i].lambda > 0.0) {
      rs.atom_coeff[i] = s * rng.circular_normal(CounterRng::Kind::Atom, i);
    }
  }
  if (real) {
    // Atoms are sorted and symmetric, so the mirror of i is na - 1 - i.
    for (std::size_t i = 0; i < na; ++i) {
      if (atoms[i].lambda < 0.0) rs.atom_coeff[i] = std::conj(rs.atom_coeff[na - 1 - i]);
    }
  }

  if (mu.density()) {
    const auto& g = *mu.density();
    const Eigen::Index nb = opt.bins > 0 ? opt.bins : g.nodes() - 1;
    const double width = (g.grid_max - g.grid_min) / static_cast<double>(nb);
    rs.bin_center.resize(nb);
    rs.bin_mass.resize(nb);
    rs.bin_increment.resize(nb);
    for (Eigen::Index i = 0; i < nb; ++i) {
      const double lo = g.grid_min + static_cast<double>(i) * width;
      const double hi = i + 1 == nb ? g.grid_max : lo + width;
      rs.bin_center[i] = 0.5 * (lo + hi);
      rs.bin_mass[i] = g.integral(lo, hi);
    }
    for (Eigen::Index i = 0; i < nb; ++i) {
      const Eigen::Index mirror = nb - 1 - i;
      const double s = std::sqrt(rs.bin_mass[i]);
      if (!real) {
        rs.bin_increment[i] = s * rng.circular_normal(CounterRng::Kind::Bin, i);
      } else if (i == mirror) {
        rs.bin_center[i] = 0.0;
        rs.bin_increment[i] = s * rng.normal(CounterRng::Kind::Bin, i);
      } else if (i > mirror) {
        rs.bin_mass[mirror] = rs.bin_mass[i];
        rs.bin_center[mirror] = -rs.bin_center[i];
        rs.bin_increment[i] = s * rng.circular_normal(CounterRng::Kind::Bin, i);
        rs.bin_increment[mirror] = std::conj(rs.bin_increment[i]);
      }
    }
  }
  return rs;
}

GaussianProcess::GaussianProcess(SpectralMeasure mu, std::shared_ptr<const RandomSpectrum> spectrum,
                                 FrequencyResponse weight)
    : GaussianProcess(std::move(mu), std::move(spectrum), std::move(weight), true, true) {}

GaussianProcess::GaussianProcess(SpectralMeasure mu, std::shared_ptr<const RandomSpectrum> spectrum,
                                 FrequencyResponse weight, bool keep_atoms, bool keep_bins)
    : mu_(std::move(mu)),
      spectrum_(std::move(spectrum)),
      weight_(std::move(weight)),
      keep_atoms_(keep_atoms),
      keep_bins_(keep_bins) {
  if (!spectrum_) throw std::invalid_argument("GaussianProcess needs a random spectrum");
  if (!keep_atoms) mu_ = decompose(mu_).continuous;
  if (!keep_bins) mu_ = decompose(mu_).discrete;
  build(keep_atoms, keep_bins);
}

void GaussianProcess::build(bool keep_atoms, bool keep_bins) {
  const auto& rs = *spectrum_;
  if (keep_atoms) {
    for (std::size_t i = 0; i < rs.atom_lambda.size(); ++i) {
      if (rs.atom_coeff[i] == Complex(0.0, 0.0)) continue;
      const double lam = rs.atom_lambda[i];
      discrete_.freq.push_back(lam);
      discrete_.coeff.push_back(checked_weight(weight_, lam) * rs.atom_coeff[i]);
    }
  }
  if (keep_bins) {
    for (std::size_t i = 0; i < rs.bin_center.size(); ++i) {
      if (rs.bin_mass[i] == 0.0) continue;
      const double lam = rs.bin_center[i];
      continuous_.freq.push_back(lam);
      continuous_.coeff.push_back(checked_weight(weight_, lam) * rs.bin_increment[i]);
    }
  }
  all_ = discrete_;
  all_.freq.insert(all_.freq.end(), continuous_.freq.begin(), continuous_.freq.end());
  all_.coeff.insert(all_.coeff.end(), continuous_.coeff.begin(), continuous_.coeff.end());
}

GaussianProcess GaussianProcess::filtered(const FrequencyResponse& extra) const {
  FrequencyResponse w;
  if (!weight_) {
    w = extra;
  } else {
    w = [inner = weight_, extra](double lambda) { return inner(lambda) * extra(lambda); };
  }
  GaussianProcess out(mu_, spectrum_, w, keep_atoms_, keep_bins_);
  out.warnings_ = warnings_;
  return out;
}

GaussianProcess GaussianProcess::discrete_part() const {
  return GaussianProcess(mu_, spectrum_, weight_, keep_atoms_, false);
}

GaussianProcess GaussianProcess::continuous_part() const {
  return GaussianProcess(mu_, spectrum_, weight_, false, keep_bins_);
}

SpectralMeasure GaussianProcess::filtered_measure() const {
  if (!weight_) return mu_;
  return filter_measure(mu_, weight_);
}

GaussianProcess synthesize(const SpectralMeasure& mu, std::uint64_t seed, std::uint64_t stream_id,
                           const SynthesisOptions& opt) {
  auto rs = std::make_shared<const RandomSpectrum>(draw_spectrum(mu, seed, stream_id, opt));
  return GaussianProcess(mu, std::move(rs));
}

Eigen::VectorXcd sample_path(const GaussianProcess& proc, const std::vector<double>& times) {
  for (double t : times) {
    if (!std::isfinite(t)) throw std::invalid_argument("sample_path: non-finite time");
  }
  const std::size_t n = times.size();
  if (n >= 3) {
    const double dt = (times.back() - times.front()) / static_cast<double>(n - 1);
    bool uniform = dt > 0.0;
    for (std::size_t i = 0; uniform && i < n; ++i) {
      uniform = std::abs(times[i] - (times.front() + static_cast<double>(i) * dt)) <=
                1e-12 * std::max(1.0, std::abs(times[i]));
    }
    if (uniform) {
      return proc.components().evaluate_uniform(times.front(), dt, static_cast<Eigen::Index>(n));
    }
  }
  return proc.components().evaluate(times);
}

GaussianProcess fractional_derivative(const GaussianProcess& proc, double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("fractional_derivative: alpha in (0, 2)");
  GaussianProcess out =
      proc.filtered([alpha](double lambda) -> Complex { return std::pow(std::abs(lambda), alpha); });
  if (proc.measure().family()) {
    const auto m = spectral_moment(proc.measure(), alpha);
    if (!m.diagnostic.finite) {
      out.add_warning("declared " + proc.measure().family()->name() +
                      " family has a divergent |lambda|^{2 alpha} moment diagnostic");
    }
  }
  return out;
}

double d_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("d_alpha: alpha in (0, 2)");
  static std::mutex mtx;
  static std::map<double, double> cache;
  {
    std::lock_guard<std::mutex> lock(mtx);
    if (auto it = cache.find(alpha); it != cache.end()) return it->second;
  }
  const auto r = quad::one_minus_cos_power(1.0, 1.0 + alpha, 0.0,
                                           std::numeric_limits<double>::infinity());
  if (!r.converged) throw std::runtime_error("d_alpha: quadrature did not converge");
  const double d = -2.0 * r.value;
  std::lock_guard<std::mutex> lock(mtx);
  cache.emplace(alpha, d);
  return d;
}

double khat(double alpha, double lambda) {
  const double x = std::abs(lambda);
  if (x == 0.0) return 1.0;
  const double d = d_alpha(alpha);
  constexpr double kSplit = 64.0;
  if (x <= kSplit) {
    const auto r = quad::one_minus_cos_power(1.0, 1.0 + alpha, 0.0, x);
    if (!r.converged) throw std::runtime_error("khat: quadrature did not converge");
    return 1.0 + 2.0 / d * r.value;
  }
  const auto r = quad::one_minus_cos_power(1.0, 1.0 + alpha, x,
                                           std::numeric_limits<double>::infinity());
  if (!r.converged) throw std::runtime_error("khat: quadrature did not converge");
  return -2.0 / d * r.value;
}

HypersingularSample hypersingular_truncated(const GaussianProcess& proc, double alpha, double eps,
                                            double t) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("hypersingular_truncated: eps in (0, 1)");
  const double d = d_alpha(alpha);
  HypersingularSample out;
  const auto& comp = proc.components();
  Complex s(0.0, 0.0);
  for (std::size_t n = 0; n < comp.freq.size(); ++n) {
    const double lam = comp.freq[n];
    if (lam == 0.0) continue;
    s += comp.coeff[n] * std::pow(std::abs(lam), alpha) * khat(alpha, eps * lam) *
         std::polar(1.0, lam * t);
  }
  out.sample = d * s;

  const SpectralMeasure fm = proc.filtered_measure();
  auto f = [alpha, eps](double lam) {
    if (lam == 0.0) return 0.0;
    const double k = khat(alpha, eps * lam);
    return std::pow(std::abs(lam), 2.0 * alpha) * k * k;
  };
  double m = 0.0;
  for (const auto& at : fm.atoms()) m += at.mass * f(at.lambda);
  if (fm.density()) m += integrate_density<double>(*fm.density(), f, {0.0});
  out.second_moment = d * d * m;
  return out;
}

Complex hypersingular_time_domain(const GaussianProcess& proc, double alpha, double eps, double t,
                                  double window) {
  if (!(eps > 0.0 && window > eps)) throw std::invalid_argument("hypersingular_time_domain: bad range");
  const auto& comp = proc.components();
  double top = 1.0;
  for (double f : comp.freq) top = std::max(top, std::abs(f));
  const Complex x0 = comp(t);
  auto integrand = [&](double h) -> Complex {
    return (comp(t + h) + comp(t - h) - 2.0 * x0) * std::pow(h, -1.0 - alpha);
  };
  std::vector<double> breaks{eps};
  for (double h = 2.0 * eps; h < 1.0; h *= 2.0) breaks.push_back(h);
  const double panel = std::numbers::pi / top;
  for (double h = 1.0; h < window; h += panel) {
    if (h > breaks.back()) breaks.push_back(h);
  }
  breaks.push_back(window);
  quad::Options opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-12;
  const auto r = quad::gauss_kronrod_pieces<Complex>(integrand, breaks, opt);
  return r.value - x0 * 2.0 * std::pow(window, -alpha) / alpha;
}

double derivative_quotient_error(const SpectralMeasure& mu, double h) {
  if (h == 0.0) throw std::invalid_argument("derivative_quotient_error: h must be nonzero");
  auto f = [h](double lam) {
    const double theta = lam * h;
    const double s = std::sin(0.5 * theta);
    const double re = -2.0 * s * s / h;
    const double im = sin_minus_x(theta) / h;
    return re * re + im * im;
  };
  double e = 0.0;
  for (const auto& at : mu.atoms()) e += at.mass * f(at.lambda);
  if (mu.density()) e += integrate_density<double>(*mu.density(), f);
  return e;
}

void write_path_csv(const std::string& path, const std::vector<double>& times,
                    const Eigen::VectorXcd& values) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,re,im\n";
  char buf[96];
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Complex v = values[static_cast<Eigen::Index>(i)];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", times[i], v.real(), v.imag());
    out << buf;
  }
}

}  // namespace apframe
