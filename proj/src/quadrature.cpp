#include "apframe/quadrature.hpp"

#include <numbers>
#include <stdexcept>

namespace apframe::quad {
namespace {

constexpr double kTailStart = 64.0;

// int_H^inf e^{i omega h} h^{-p} dh = (i/omega) e^{i omega H} sum_n (-i/omega)^n (p)_n H^{-p-n}
Complex exp_power_tail(double omega, double p, double h_start) {
  if (omega * h_start < 32.0) {
    throw std::domain_error("exp_power_tail: omega*H too small for the asymptotic series");
  }
  const Complex minus_i_over_omega(0.0, -1.0 / omega);
  Complex term = std::pow(h_start, -p);
  Complex sum = term;
  for (int n = 1; n < 60; ++n) {
    term *= minus_i_over_omega * ((p + n - 1) / h_start);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return Complex(0.0, 1.0 / omega) * std::polar(1.0, omega * h_start) * sum;
}

// int_0^H (1 - cos(omega h)) h^{-p} dh for omega*H <= 1.
double series_core(double omega, double p, double h_end) {
  if (h_end <= 0.0) return 0.0;
  const double x2 = (omega * h_end) * (omega * h_end);
  double sum = 0.0;
  double coeff = 1.0;  // (omega H)^{2n} / (2n)!
  for (int n = 1; n < 40; ++n) {
    coeff *= x2 / ((2.0 * n - 1.0) * (2.0 * n));
    const double term = coeff / (2.0 * n + 1.0 - p) * (n % 2 == 1 ? 1.0 : -1.0);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum * std::pow(h_end, 1.0 - p);
}

}  // namespace

double cos_power_tail(double omega, double p, double h_start) {
  return exp_power_tail(omega, p, h_start).real();
}

double sin_power_tail(double omega, double p, double h_start) {
  return exp_power_tail(omega, p, h_start).imag();
}

Result<double> one_minus_cos_power(double omega, double p, double lo, double hi,
                                   const Options& opt) {
  if (!(omega > 0.0) || !(p > 1.0 && p < 3.0) || lo < 0.0 || !(hi > lo)) {
    throw std::domain_error("one_minus_cos_power: need omega > 0, 1 < p < 3, 0 <= lo < hi");
  }
  Result<double> out;
  const double h_series = 1.0 / omega;
  const double h_tail = kTailStart / omega;

  if (lo < h_series) {
    const double top = std::min(hi, h_series);
    out.value += series_core(omega, p, top) - series_core(omega, p, lo);
  }

  auto integrand = [omega, p](double h) {
    const double s = std::sin(0.5 * omega * h);
    return 2.0 * s * s * std::pow(h, -p);
  };
  const double panel = std::numbers::pi / omega;
  const double mid_lo = std::max(lo, h_series);
  const double mid_hi = std::isinf(hi) ? std::max(h_tail, mid_lo) : hi;
  if (mid_hi > mid_lo) {
    std::vector<double> breaks{mid_lo};
    // Panel boundaries on the fixed grid h_series + k*panel keep results
    // independent of lo/hi rounding.
    double next = h_series + std::ceil((mid_lo - h_series) / panel + 1e-12) * panel;
    while (next < mid_hi) {
      if (next > breaks.back()) breaks.push_back(next);
      next += panel;
    }
    breaks.push_back(mid_hi);
    auto r = gauss_kronrod_pieces<double>(integrand, breaks, opt);
    out.value += r.value;
    out.error += r.error;
    out.evaluations += r.evaluations;
    out.converged = r.converged;
  }

  if (std::isinf(hi)) {
    const double start = std::max(lo, h_tail);
    out.value += std::pow(start, 1.0 - p) / (p - 1.0) - cos_power_tail(omega, p, start);
  }
  return out;
}

}  // namespace apframe::quad
