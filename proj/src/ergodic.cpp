#include "apframe/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace apframe {

namespace {

Eigen::Index steps_for(double x, double dt, const char* what) {
  const double r = x / dt;
  const double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, std::abs(r))) {
    throw std::invalid_argument(std::string(what) + " must be a multiple of dt");
  }
  return static_cast<Eigen::Index>(n);
}

Eigen::Index center_index(const UniformSamples& path) {
  return steps_for(-path.t0, path.dt, "path origin");
}

template <class Values>
double trapezoid_mean(const Values& f) {
  const Eigen::Index n = f.size();
  if (n < 2) return n == 1 ? f[0] : 0.0;
  return (f.sum() - 0.5 * (f[0] + f[n - 1])) / static_cast<double>(n - 1);
}

void fill_trace_tail(AverageTrace& tr) {
  if (tr.partials.empty()) return;
  tr.estimate = tr.partials.back();
  tr.standard_error = tr.standard_errors.back();
  if (tr.partials.size() >= 2) tr.cauchy_gap = std::abs(tr.partials.back() - tr.partials[tr.partials.size() - 2]);
}

void check_horizons(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (!(h[i] > h[i - 1])) throw std::invalid_argument("horizons must be strictly increasing");
  }
}

}  // namespace

std::pair<double, double> batch_mean(const Eigen::Ref<const Eigen::VectorXd>& x, int batches) {
  const Eigen::Index n = x.size();
  if (n == 0) return {0.0, 0.0};
  const double mean = x.mean();
  if (n < 2 * batches) return {mean, 0.0};
  Eigen::VectorXd means(batches);
  for (int b = 0; b < batches; ++b) {
    const Eigen::Index lo = n * b / batches;
    const Eigen::Index hi = n * (b + 1) / batches;
    means[b] = x.segment(lo, hi - lo).mean();
  }
  const double mm = means.mean();
  const double var = (means.array() - mm).square().sum() / (batches - 1);
  return {mean, std::sqrt(var / batches)};
}

UniformSamples sample_symmetric(const GaussianProcess& proc, double T, double dt, double extra) {
  if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("sample_symmetric: need T, dt > 0");
  const Eigen::Index m = steps_for(T, dt, "T");
  const Eigen::Index e = static_cast<Eigen::Index>(std::ceil(std::max(extra, 0.0) / dt - 1e-9));
  UniformSamples s;
  s.dt = dt;
  s.t0 = -static_cast<double>(m) * dt;
  s.values = proc.components().evaluate_uniform(s.t0, dt, 2 * m + 1 + e);
  return s;
}

double highest_frequency(const GaussianProcess& proc) {
  double top = 0.0;
  const auto& c = proc.components();
  for (std::size_t i = 0; i < c.freq.size(); ++i) {
    if (c.coeff[i] != Complex(0.0, 0.0)) top = std::max(top, std::abs(c.freq[i]));
  }
  return top;
}

AverageTrace b2_norm_samples(const UniformSamples& path, std::vector<double> T_list) {
  check_horizons(T_list);
  AverageTrace tr;
  const Eigen::Index c = center_index(path);
  for (double T : T_list) {
    const Eigen::Index m = steps_for(T, path.dt, "T");
    if (c - m < 0 || c + m >= path.values.size()) throw std::invalid_argument("path does not cover horizon");
    const Eigen::VectorXd f = path.values.segment(c - m, 2 * m + 1).cwiseAbs2();
    tr.horizons.push_back(T);
    tr.partials.push_back(trapezoid_mean(f));
    tr.standard_errors.push_back(batch_mean(f).second);
  }
  fill_trace_tail(tr);
  return tr;
}

AverageTrace b2_norm_continuous(const GaussianProcess& proc, std::vector<double> T_list, double dt) {
  if (T_list.empty()) throw std::invalid_argument("b2_norm_continuous: empty horizon list");
  check_horizons(T_list);
  const UniformSamples path = sample_symmetric(proc, T_list.back(), dt);
  AverageTrace tr = b2_norm_samples(path, T_list);
  const double top = highest_frequency(proc);
  if (top > 0.0 && dt > std::numbers::pi / (5.0 * top)) {
    std::ostringstream os;
    os << "aliasing: dt = " << dt << " exceeds pi/(5 lambda_max) = " << std::numbers::pi / (5.0 * top);
    tr.warnings.push_back(os.str());
  }
  return tr;
}

AverageTrace b2_norm_sequence(const Eigen::VectorXcd& samples, std::vector<int> N_list) {
  AverageTrace tr;
  const Eigen::Index nmax = (samples.size() - 1) / 2;
  int prev = -1;
  for (int N : N_list) {
    if (N <= prev) throw std::invalid_argument("horizons must be strictly increasing");
    prev = N;
    if (N > nmax) throw std::invalid_argument("samples do not cover K(N)");
    const Eigen::VectorXd f = samples.segment(nmax - N, 2 * N + 1).cwiseAbs2();
    const auto [mean, se] = batch_mean(f);
    tr.horizons.push_back(N);
    tr.partials.push_back(mean);
    tr.standard_errors.push_back(se);
  }
  fill_trace_tail(tr);
  return tr;
}

ComplexEstimate autocorrelation_samples(const UniformSamples& path, double tau, double T) {
  const Eigen::Index c = center_index(path);
  const Eigen::Index m = steps_for(T, path.dt, "T");
  const Eigen::Index s = steps_for(tau, path.dt, "tau");
  const Eigen::Index lo = c - m, hi = c + m;
  if (lo < 0 || lo + s < 0 || hi >= path.values.size() || hi + s >= path.values.size()) {
    throw std::invalid_argument("path does not cover [-T, T + tau]");
  }
  const Eigen::Index n = 2 * m + 1;
  const Eigen::VectorXcd f =
      path.values.segment(lo, n).cwiseProduct(path.values.segment(lo + s, n).conjugate());
  ComplexEstimate out;
  const Eigen::VectorXd re = f.real();
  const Eigen::VectorXd im = f.imag();
  out.value = Complex(trapezoid_mean(re), trapezoid_mean(im));
  const double se_re = batch_mean(re).second;
  const double se_im = batch_mean(im).second;
  out.standard_error = std::hypot(se_re, se_im);
  return out;
}

ComplexEstimate autocorrelation_estimate(const GaussianProcess& proc, double tau, double T, double dt) {
  const double extra = std::max(tau, 0.0);
  const double before = std::max(-tau, 0.0);
  // Cover [-T - before, T + extra] by sampling a symmetric window around 0.
  const Eigen::Index m = steps_for(T, dt, "T");
  const Eigen::Index b = steps_for(before, dt, "tau");
  UniformSamples path;
  path.dt = dt;
  path.t0 = -static_cast<double>(m + b) * dt;
  const Eigen::Index e = steps_for(extra, dt, "tau");
  path.values = proc.components().evaluate_uniform(path.t0, dt, 2 * m + 1 + b + e);
  return autocorrelation_samples(path, tau, T);
}

Complex bohr_transform(const UniformSamples& path, double lambda, double T) {
  const Eigen::Index c = center_index(path);
  const Eigen::Index m = steps_for(T, path.dt, "T");
  if (c - m < 0 || c + m >= path.values.size()) throw std::invalid_argument("path does not cover horizon");
  Eigen::VectorXcd f(2 * m + 1);
  for (Eigen::Index k = 0; k < 2 * m + 1; ++k) {
    const double t = path.time(c - m + k);
    f[k] = path.values[c - m + k] * std::polar(1.0, -lambda * t);
  }
  const Eigen::VectorXd re = f.real(), im = f.imag();
  return {trapezoid_mean(re), trapezoid_mean(im)};
}

Complex bohr_transform_sequence(const Eigen::VectorXcd& samples, double b, double lambda, int N) {
  const Eigen::Index nmax = (samples.size() - 1) / 2;
  if (N > nmax) throw std::invalid_argument("samples do not cover K(N)");
  Complex s(0.0, 0.0);
  for (int n = -N; n <= N; ++n) s += samples[nmax + n] * std::polar(1.0, -lambda * n * b);
  return s / static_cast<double>(2 * N + 1);
}

Eigen::VectorXcd coefficient_sequence(const TrigSum& components, const AffineSystem& sys, int j, int N) {
  const double s = sys.scale(j);
  TrigSum seq;
  for (std::size_t i = 0; i < components.freq.size(); ++i) {
    const Complex p = sys.wavelet(s * components.freq[i]);
    if (p == Complex(0.0, 0.0) || components.coeff[i] == Complex(0.0, 0.0)) continue;
    seq.freq.push_back(components.freq[i] * sys.b * s);
    seq.coeff.push_back(std::conj(p) * components.coeff[i]);
  }
  return seq.evaluate_uniform(-static_cast<double>(N), 1.0, 2 * static_cast<Eigen::Index>(N) + 1);
}

Eigen::VectorXcd coefficient_sequence(const GaussianProcess& proc, const AffineSystem& sys, int j, int N) {
  return coefficient_sequence(proc.components(), sys, j, N);
}

std::map<double, Complex> periodized_coefficients(const TrigSum& components, const AffineSystem& sys, int j) {
  const double s = sys.scale(j);
  const double period = sys.dual_step() / s;
  std::map<double, Complex> out;
  for (std::size_t i = 0; i < components.freq.size(); ++i) {
    const double lam = components.freq[i];
    const Complex d = std::conj(sys.wavelet(s * lam)) * components.coeff[i];
    double rep = std::fmod(lam, period);
    if (rep < 0.0) rep += period;
    if (rep >= period * (1.0 - 1e-12)) rep = 0.0;
    auto it = out.lower_bound(rep - 1e-9 * period);
    if (it != out.end() && std::abs(it->first - rep) <= 1e-9 * period) {
      it->second += d;
    } else {
      out.emplace(rep, d);
    }
  }
  return out;
}

SandwichResult ap_frame_sum(const GaussianProcess& proc, const AffineSystem& sys, JRange j_window, int N,
                            double T, double dt, double A, double B, double tol) {
  SandwichResult out;
  if (sys.wavelet.band_limited()) {
    const auto& c = proc.components();
    int below = 0, above = 0;
    for (std::size_t i = 0; i < c.freq.size(); ++i) {
      if (c.coeff[i] == Complex(0.0, 0.0) || c.freq[i] == 0.0) continue;
      const JRange r = active_scales(sys, c.freq[i]);
      for (int j = r.lo; j <= r.hi; ++j) {
        if (sys.wavelet(sys.scale(j) * c.freq[i]) == Complex(0.0, 0.0)) continue;
        if (j < j_window.lo) ++below;
        if (j > j_window.hi) ++above;
      }
    }
    if (below + above > 0) {
      out.warnings.push_back("j window [" + std::to_string(j_window.lo) + ", " + std::to_string(j_window.hi) +
                             "] misses " + std::to_string(below + above) + " active (frequency, scale) pairs");
    }
  }
  for (int j = j_window.lo; j <= j_window.hi; ++j) {
    const Eigen::VectorXcd z = coefficient_sequence(proc, sys, j, N);
    const double v = z.squaredNorm() / static_cast<double>(z.size());
    out.per_scale.push_back(v);
    out.middle += v;
  }
  out.b2 = b2_norm_continuous(proc, {T}, dt).estimate;
  out.lhs = A * out.b2;
  out.rhs = B * out.b2;
  out.lower_margin = out.middle - out.lhs;
  out.upper_margin = out.rhs - out.middle;
  out.holds = out.middle >= out.lhs * (1.0 - tol) && out.middle <= out.rhs * (1.0 + tol);
  return out;
}

Complex coeff_covariance(const AffineSystem& sys, const SpectralMeasure& mu, int j, double k) {
  const double s = sys.scale(j);
  auto f = [&](double lam) -> Complex {
    return std::polar(std::norm(sys.wavelet(s * lam)), lam * k * s);
  };
  Complex r(0.0, 0.0);
  for (const auto& at : mu.atoms()) r += at.mass * f(at.lambda);
  if (mu.density()) {
    std::vector<double> breaks;
    if (const auto& band = sys.wavelet.band()) {
      for (double e : {band->lo / s, band->hi / s}) {
        breaks.push_back(e);
        breaks.push_back(-e);
      }
    }
    r += integrate_density<Complex>(*mu.density(), f, breaks);
  }
  return r;
}

DecompositionReport decomposition_check(const GaussianProcess& proc, const AffineSystem& sys, int j, int N) {
  DecompositionReport rep;
  const Eigen::VectorXcd z = coefficient_sequence(proc.components(), sys, j, N);
  const Eigen::VectorXcd zc = coefficient_sequence(proc.continuous_components(), sys, j, N);
  const Eigen::VectorXcd zd = coefficient_sequence(proc.discrete_components(), sys, j, N);
  rep.additivity_error = (z - zc - zd).cwiseAbs().maxCoeff();
  const double n = static_cast<double>(z.size());
  rep.norm_total = z.squaredNorm() / n;
  rep.norm_continuous = zc.squaredNorm() / n;
  rep.norm_discrete = zd.squaredNorm() / n;
  const Eigen::VectorXcd cross = zd.cwiseProduct(zc.conjugate());
  const Eigen::VectorXd re = cross.real(), im = cross.imag();
  const auto [mre, sre] = batch_mean(re);
  const auto [mim, sim] = batch_mean(im);
  rep.cross_term = Complex(mre, mim);
  rep.cross_standard_error = std::hypot(sre, sim);
  rep.cross_within_3se = std::abs(rep.cross_term) < 3.0 * rep.cross_standard_error ||
                         std::abs(rep.cross_term) == 0.0;
  return rep;
}

}  // namespace apframe
