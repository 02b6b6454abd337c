#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <vector>

namespace apframe {

using Complex = std::complex<double>;

namespace quad {

template <class Scalar>
struct Result {
  Scalar value{};
  double error = 0.0;
  int evaluations = 0;
  bool converged = true;
};

struct Options {
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
  int max_intervals = 2000;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525478226, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <class Scalar>
struct Panel {
  double a, b;
  Scalar value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class Scalar, class F>
Panel<Scalar> gk21(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const Scalar fc = f(center);
  Scalar kronrod = fc * kWgk[10];
  Scalar gauss{};
  for (int i = 0; i < 10; ++i) {
    const double dx = half * kXgk[i];
    const Scalar sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[i] * sum;
    if (i % 2 == 1) gauss += kWg[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (21 point) integration of `f` over [a, b].
/// The panel with the largest error estimate is bisected until the summed
/// estimate meets max(abs_tol, rel_tol*|I|) or the interval budget runs out.
template <class Scalar = double, class F>
Result<Scalar> gauss_kronrod(const F& f, double a, double b, const Options& opt = {}) {
  Result<Scalar> out;
  if (a == b) return out;
  std::priority_queue<detail::Panel<Scalar>> heap;
  auto first = detail::gk21<Scalar>(f, a, b);
  Scalar total = first.value;
  double err = first.error;
  heap.push(first);
  int intervals = 1;
  out.evaluations = 21;
  while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (intervals >= opt.max_intervals) {
      out.converged = false;
      break;
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      out.converged = false;
      heap.push(worst);
      break;
    }
    auto left = detail::gk21<Scalar>(f, worst.a, mid);
    auto right = detail::gk21<Scalar>(f, mid, worst.b);
    out.evaluations += 42;
    ++intervals;
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from the panels to shed the drift of the running update.
  Scalar resum{};
  double err_sum = 0.0;
  std::vector<detail::Panel<Scalar>> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const auto& l, const auto& r) { return l.a < r.a; });
  for (const auto& p : panels) {
    resum += p.value;
    err_sum += p.error;
  }
  out.value = resum;
  out.error = err_sum;
  return out;
}

/// Integrates over consecutive breakpoints, one adaptive run per piece.
template <class Scalar = double, class F>
Result<Scalar> gauss_kronrod_pieces(const F& f, const std::vector<double>& breaks,
                                    const Options& opt = {}) {
  Result<Scalar> out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    auto r = gauss_kronrod<Scalar>(f, breaks[i], breaks[i + 1], opt);
    out.value += r.value;
    out.error += r.error;
    out.evaluations += r.evaluations;
    out.converged = out.converged && r.converged;
  }
  return out;
}

/// int_lo^hi (1 - cos(omega h)) h^{-p} dh for 0 <= lo < hi <= +inf, omega > 0
/// and 1 < p < 3. The integrand is handled by a power series below
/// h = 1/omega, Gauss-Kronrod panels of width pi/omega up to h = 64/omega, and
/// the asymptotic expansion of the oscillatory tail beyond.
Result<double> one_minus_cos_power(double omega, double p, double lo, double hi,
                                   const Options& opt = {});

/// int_H^inf cos(omega h) h^{-p} dh for omega*H >= 32 (asymptotic series).
double cos_power_tail(double omega, double p, double h_start);

/// int_H^inf sin(omega h) h^{-p} dh for omega*H >= 32 (asymptotic series).
double sin_power_tail(double omega, double p, double h_start);

}  // namespace quad
}  // namespace apframe
