#include "apframe/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "apframe/frames.hpp"
#include "apframe/quadrature.hpp"

namespace apframe {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Largest frequency whose oscillation must be resolved by fixed panels. A
// continuous part decays in h, so only atoms and compact bands count.
double oscillation_scale(const SpectralMeasure& mu, bool use_family) {
  double lam = 0.0;
  for (const auto& at : mu.atoms()) lam = std::max(lam, std::abs(at.lambda));
  if (use_family && mu.family()) {
    const double s = mu.family()->support_max();
    if (std::isfinite(s)) lam = std::max(lam, s);
  } else if (mu.density()) {
    lam = std::max(lam, mu.truncation_bound());
  }
  return lam;
}

template <class G>
double integrate_piece(const G& g, double p, double lo, double hi, double lambda) {
  std::vector<double> breaks{lo};
  if (lambda > 0.0) {
    double width = kPi / lambda;
    width = std::max(width, (hi - lo) / 2048.0);
    for (double x = lo + width; x < hi; x += width) breaks.push_back(x);
  }
  breaks.push_back(hi);
  quad::Options opt;
  opt.abs_tol = 1e-16;
  opt.rel_tol = 1e-11;
  opt.max_intervals = 400;
  auto f = [&](double h) { return g(h) * std::pow(h, -p); };
  return quad::gauss_kronrod_pieces<double>(f, breaks, opt).value;
}

int ladder_length(double ratio) {
  return std::max(3, static_cast<int>(std::lround(std::log2(ratio))));
}

// 2 int_{eps0}^{window} g(h) h^{-p} dh over dyadic shells from h = 1.
template <class G>
SingularIntegral two_sided(const G& g, double p, double window, double eps0, double lambda) {
  if (!(eps0 > 0.0 && eps0 < 1.0 && window > 1.0)) {
    throw std::invalid_argument("singular integral: need 0 < eps0 < 1 < window");
  }
  SingularIntegral out;
  out.eps0 = eps0;
  out.window = window;
  const int kc = ladder_length(1.0 / eps0);
  const int kt = ladder_length(window);
  std::vector<double> cb, cp, tb, tp;
  double acc = 0.0;
  for (int k = 0; k < kc; ++k) {
    const double hi = std::ldexp(1.0, -k);
    const double lo = k + 1 == kc ? eps0 : std::ldexp(1.0, -k - 1);
    acc += 2.0 * integrate_piece(g, p, lo, hi, lambda);
    cb.push_back(1.0 / lo);
    cp.push_back(acc);
  }
  out.core = acc;
  acc = 0.0;
  for (int k = 0; k < kt; ++k) {
    const double lo = std::ldexp(1.0, k);
    const double hi = k + 1 == kt ? window : std::ldexp(1.0, k + 1);
    acc += 2.0 * integrate_piece(g, p, lo, hi, lambda);
    tb.push_back(hi);
    tp.push_back(acc);
  }
  out.tail = acc;
  out.value = out.core + out.tail;
  out.core_diagnostic = assess_growth(std::move(cb), std::move(cp));
  out.tail_diagnostic = assess_growth(std::move(tb), std::move(tp));
  out.finite = out.core_diagnostic.finite && out.tail_diagnostic.finite;
  return out;
}

void check_alpha(double alpha, double hi, const char* who) {
  if (!(alpha > 0.0 && alpha < hi)) {
    throw std::invalid_argument(std::string(who) + ": alpha out of range");
  }
}

double band_energy(const SpectralMeasure& mu, const AffineSystem& sys, int j, bool use_family) {
  const double s = sys.scale(j);
  auto f = [&](double lam) { return std::norm(sys.wavelet(s * lam)); };
  double e = 0.0;
  for (const auto& at : mu.atoms()) e += at.mass * f(at.lambda);
  const auto& band = sys.wavelet.band();
  if (use_family && mu.family()) {
    const auto& fam = *mu.family();
    if (band) {
      const double lo = band->lo / s, hi = band->hi / s;
      e += integrate_family<double>(fam, f, lo, hi) + integrate_family<double>(fam, f, -hi, -lo);
    } else {
      e += integrate_family<double>(fam, f, -1e6, 1e6);
    }
  } else if (mu.density()) {
    std::vector<double> breaks;
    if (band) {
      for (double x : {band->lo / s, band->hi / s}) {
        breaks.push_back(x);
        breaks.push_back(-x);
      }
    }
    e += integrate_density<double>(*mu.density(), f, breaks);
  }
  return e;
}

// Scales contributing at the low-frequency end: past j_top the band sits
// below 1e-9 and its energy is negligible for every weight style.
int top_scale(const AffineSystem& sys) {
  const double lo = sys.wavelet.band() ? sys.wavelet.band()->lo : 1.0;
  return static_cast<int>(std::ceil(std::log(lo / 1e-9) / std::log(static_cast<double>(sys.a))));
}

bool frames_hold(const AffineSystem& sys, double alpha, std::vector<std::string>& why) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    why.push_back("criterion not applicable: Riesz potential needs alpha in (0, 1)");
    return false;
  }
  if (!sys.wavelet.band_limited()) {
    why.push_back("criterion not applicable: frame test needs a band-limited wavelet");
    return false;
  }
  const auto grid = symmetric_log_grid(1e-3, 1e3, 2000);
  if (!frame_bounds_bandlimited(sys, grid).is_frame) {
    why.push_back("criterion not applicable: affine system is not a frame on the test grid");
    return false;
  }
  AffineSystem riesz(riesz_potential(sys.wavelet, alpha), sys.a, sys.b);
  if (!frame_bounds_bandlimited(riesz, grid).is_frame) {
    why.push_back("criterion not applicable: Riesz-potential system is not a frame on the test grid");
    return false;
  }
  return true;
}

}  // namespace

double f_alpha(double alpha, double lambda) {
  check_alpha(alpha, 1.0, "f_alpha");
  if (lambda == 0.0) return 0.0;
  auto r = quad::one_minus_cos_power(std::abs(lambda), 1.0 + 2.0 * alpha, 0.0,
                                     std::numeric_limits<double>::infinity());
  if (!r.converged) throw std::runtime_error("f_alpha: quadrature did not converge");
  return 4.0 * r.value;
}

double f_alpha_constant(double alpha) { return f_alpha(alpha, 1.0); }

SingularIntegral covariance_singular_integral(const Covariance& R, double alpha, double window, double eps0) {
  check_alpha(alpha, 1.0, "covariance_singular_integral");
  auto g = [&R](double h) { return std::abs(R.increment(h)); };
  return two_sided(g, 1.0 + 2.0 * alpha, window, eps0, oscillation_scale(R.source(), R.uses_family()));
}

double second_difference_spectral(const SpectralMeasure& mu, double h) {
  auto f = [h](double lam) {
    const double s = std::sin(0.5 * h * lam);
    return 16.0 * s * s * s * s;
  };
  double v = 0.0;
  for (const auto& at : mu.atoms()) v += at.mass * f(at.lambda);
  if (mu.density()) v += integrate_density<double>(*mu.density(), f);
  return v;
}

double second_difference_covariance(const Covariance& R, double h) {
  // 6 (R(0) - Re R(h)) - 2 (Re R(2h) - R(0)) written with increments.
  return 8.0 * R.increment(h).real() - 2.0 * R.increment(2.0 * h).real();
}

SecondDifference second_difference_integral(const Covariance& R, double alpha, double window, double eps0) {
  check_alpha(alpha, 2.0, "second_difference_integral");
  const SpectralMeasure& mu = R.source();
  auto g = [&R](double h) { return std::abs(R.second_difference(h)); };
  SecondDifference out;
  out.integral = two_sided(g, 1.0 + 2.0 * alpha, window, eps0, oscillation_scale(mu, R.uses_family()));
  const Covariance represented(mu, false);
  for (double h : {1e-2, 1e-1, 1.0, 10.0, 100.0}) {
    const double s = second_difference_spectral(mu, h);
    const double c = second_difference_covariance(represented, h);
    const double scale = std::max(std::abs(s), 1e-12 * std::max(represented.at_zero(), 1e-300));
    out.identity_gap = std::max(out.identity_gap, std::abs(s - c) / scale);
  }
  return out;
}

HypersingularTrace hypersingular_convergence(const SpectralMeasure& mu, double alpha,
                                             const std::vector<double>& eps_list, double tol) {
  check_alpha(alpha, 2.0, "hypersingular_convergence");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] < 1.0) || (i > 0 && !(eps_list[i] < eps_list[i - 1]))) {
      throw std::invalid_argument("hypersingular_convergence: eps list must decrease in (0, 1)");
    }
  }
  HypersingularTrace tr;
  tr.eps = eps_list;
  const double d = d_alpha(alpha);
  const double moment = truncated_moment(mu, alpha, std::numeric_limits<double>::infinity());
  tr.target_scale = d * d * moment;
  const double p = 2.0 * alpha;
  for (double eps : eps_list) {
    auto f = [&](double lam) {
      if (lam == 0.0) return 0.0;
      const double k = khat(alpha, eps * lam) - 1.0;
      return std::pow(std::abs(lam), p) * k * k;
    };
    double v = 0.0;
    for (const auto& at : mu.atoms()) v += at.mass * f(at.lambda);
    if (mu.density()) v += integrate_density<double>(*mu.density(), f, {0.0});
    tr.errors.push_back(d * d * v);
  }
  for (std::size_t i = 1; i < tr.errors.size(); ++i) {
    if (!(tr.errors[i] < tr.errors[i - 1]) && tr.errors[i - 1] > 0.0) tr.decreasing = false;
  }
  tr.converges = tr.errors.empty() || tr.errors.back() <= tol * tr.target_scale;
  return tr;
}

double scale_weight(WeightStyle style, int a, int j, double alpha) {
  const double s = std::pow(static_cast<double>(a), -2.0 * j);
  return style == WeightStyle::Pure ? std::pow(s, alpha) : std::pow(s + 1.0, alpha);
}

WeightedSum weighted_ap_sum(const GaussianProcess& proc, const AffineSystem& sys, double alpha, WeightStyle style,
                            JRange j_window, int N) {
  WeightedSum out;
  out.applicable = frames_hold(sys, alpha, out.warnings);
  if (!out.applicable) return out;
  const auto& c = proc.components();
  int missed = 0;
  for (std::size_t i = 0; i < c.freq.size(); ++i) {
    if (c.coeff[i] == Complex(0.0, 0.0) || c.freq[i] == 0.0) continue;
    const JRange r = active_scales(sys, c.freq[i]);
    for (int j = r.lo; j <= r.hi; ++j) {
      if (sys.wavelet(sys.scale(j) * c.freq[i]) == Complex(0.0, 0.0)) continue;
      if (j < j_window.lo || j > j_window.hi) ++missed;
    }
  }
  if (missed > 0) {
    out.warnings.push_back("j window [" + std::to_string(j_window.lo) + ", " + std::to_string(j_window.hi) +
                           "] misses " + std::to_string(missed) + " active (frequency, scale) pairs");
  }
  const SpectralMeasure mu = proc.filtered_measure();
  const bool discrete = !mu.density();
  double exact = 0.0;
  for (int j = j_window.lo; j <= j_window.hi; ++j) {
    const double w = scale_weight(style, sys.a, j, alpha);
    const Eigen::VectorXcd z = coefficient_sequence(proc, sys, j, N);
    out.value += w * z.squaredNorm() / static_cast<double>(z.size());
    out.expected += w * band_energy(mu, sys, j, false);
    if (discrete) {
      double s = 0.0;
      for (const auto& [rep, v] : periodized_coefficients(c, sys, j)) s += std::norm(v);
      exact += w * s;
    }
  }
  if (discrete) out.exact = exact;
  return out;
}

GrowthDiagnostic weighted_sum_diagnostic(const SpectralMeasure& mu, const AffineSystem& sys, double alpha,
                                         WeightStyle style) {
  const bool fam = mu.family().has_value();
  const int jtop = top_scale(sys);
  int kmax = 20;
  if (!fam || std::isfinite(mu.family()->support_max())) {
    const double top = fam ? mu.family()->support_max() : std::max(mu.support_max(), 1.0);
    const double lo = sys.wavelet.band() ? sys.wavelet.band()->lo : 1.0;
    const double la = std::log(static_cast<double>(sys.a));
    kmax = std::max(8, static_cast<int>(std::ceil(std::log(top / lo) / la)) + 4);
  }
  std::vector<double> bounds, partials;
  double acc = 0.0;
  for (int j = jtop; j > 0; --j) acc += scale_weight(style, sys.a, j, alpha) * band_energy(mu, sys, j, true);
  for (int k = 0; k <= kmax; ++k) {
    acc += scale_weight(style, sys.a, -k, alpha) * band_energy(mu, sys, -k, true);
    bounds.push_back(sys.scale(k));
    partials.push_back(acc);
  }
  return assess_growth(std::move(bounds), std::move(partials));
}

SmoothnessReport smoothness_verdict(const SpectralMeasure& mu, const AffineSystem& sys, double alpha,
                                    const SmoothnessOptions& opt) {
  check_alpha(alpha, 2.0, "smoothness_verdict");
  SmoothnessReport r;
  r.alpha = alpha;
  r.moment = spectral_moment(mu, alpha);
  r.verdicts.push_back({"moment", true, r.moment.diagnostic.finite});

  const Covariance R(mu, true);
  if (alpha < 1.0) {
    r.c_alpha = f_alpha_constant(alpha);
    r.cov_integral = covariance_singular_integral(R, alpha, opt.window, opt.eps0);
    r.verdicts.push_back({"cov_integral", true, r.cov_integral->finite});
  } else {
    r.verdicts.push_back({"cov_integral", false, true});
  }
  r.second_difference = second_difference_integral(R, alpha, opt.window, opt.eps0);
  r.verdicts.push_back({"second_difference", true, r.second_difference->integral.finite});

  std::vector<std::string> why;
  const bool weighted_ok = frames_hold(sys, alpha, why);
  if (weighted_ok) {
    r.weighted_pure = weighted_sum_diagnostic(mu, sys, alpha, WeightStyle::Pure);
    r.weighted_shifted = weighted_sum_diagnostic(mu, sys, alpha, WeightStyle::Shifted);
  }
  r.verdicts.push_back({"weighted_sum", weighted_ok, weighted_ok && r.weighted_pure.finite});
  r.verdicts.push_back({"weighted_sum_shifted", weighted_ok, weighted_ok && r.weighted_shifted.finite});

  // The trace runs on the represented measure, which says nothing about a
  // family's tail; it only votes when nothing was truncated.
  if (!opt.hypersingular_eps.empty()) {
    r.hypersingular = hypersingular_convergence(mu, alpha, opt.hypersingular_eps);
    const bool votes = !mu.family();
    r.verdicts.push_back({"hypersingular", votes, r.hypersingular->converges});
  }

  bool any_finite = false, any_divergent = false;
  for (const auto& v : r.verdicts) {
    if (!v.applicable) continue;
    (v.finite ? any_finite : any_divergent) = true;
  }
  r.consistent = !(any_finite && any_divergent);
  r.all_finite = any_finite && !any_divergent;
  std::ostringstream os;
  if (!r.consistent) {
    os << "INCONSISTENT verdicts at alpha " << alpha;
  } else if (r.all_finite) {
    os << "smooth at order " << alpha;
  } else {
    os << "not smooth at order " << alpha;
  }
  for (const auto& w : why) os << "; " << w;
  r.summary = os.str();
  return r;
}

nlohmann::json to_json(const GrowthDiagnostic& g) {
  return {{"bounds", g.bounds},
          {"partials", g.partials},
          {"increment_slope", g.increment_slope},
          {"partial_slope", g.partial_slope},
          {"saturated", g.saturated},
          {"verdict", verdict_label(g.finite)}};
}

namespace {
nlohmann::json singular_json(const SingularIntegral& s) {
  return {{"value", s.value},          {"core", s.core},
          {"tail", s.tail},            {"eps0", s.eps0},
          {"window", s.window},        {"core_diagnostic", to_json(s.core_diagnostic)},
          {"tail_diagnostic", to_json(s.tail_diagnostic)}, {"verdict", verdict_label(s.finite)}};
}
}  // namespace

nlohmann::json to_json(const SmoothnessReport& r) {
  nlohmann::json j;
  j["alpha"] = r.alpha;
  j["spectral_moment"] = {{"value", r.moment.value}, {"diagnostic", to_json(r.moment.diagnostic)}};
  if (r.cov_integral) {
    j["cov_singular_integral"] = singular_json(*r.cov_integral);
    j["c_alpha"] = r.c_alpha;
    j["c_alpha_times_moment"] = r.c_alpha * r.moment.value;
    j["twice_cov_integral"] = 2.0 * r.cov_integral->value;
  }
  if (r.second_difference) {
    j["second_diff_integral"] = singular_json(r.second_difference->integral);
    j["second_diff_integral"]["identity_gap"] = r.second_difference->identity_gap;
  }
  if (!r.weighted_pure.bounds.empty()) {
    j["weighted_sum"] = {{"pure", to_json(r.weighted_pure)}, {"shifted", to_json(r.weighted_shifted)}};
  }
  if (r.hypersingular) {
    j["hypersingular_trace"] = {{"eps", r.hypersingular->eps},
                                {"errors", r.hypersingular->errors},
                                {"target_scale", r.hypersingular->target_scale},
                                {"decreasing", r.hypersingular->decreasing},
                                {"converges", r.hypersingular->converges}};
  }
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : r.verdicts) {
    v.push_back({{"name", x.name},
                 {"applicable", x.applicable},
                 {"verdict", x.applicable ? verdict_label(x.finite) : "not applicable"}});
  }
  j["verdicts"] = v;
  j["consistent"] = r.consistent;
  j["summary"] = r.summary;
  return j;
}

std::string sweep_csv_header() {
  return "alpha,moment,cov_int,sd_int,weighted_pure,weighted_shifted,verdicts";
}

std::string sweep_csv_row(const SmoothnessReport& r) {
  auto num = [](double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
  };
  auto last = [&](const GrowthDiagnostic& g) { return g.partials.empty() ? std::string("") : num(g.partials.back()); };
  std::string verdicts;
  for (const auto& v : r.verdicts) {
    if (!verdicts.empty()) verdicts += ';';
    verdicts += v.name + '=' + (v.applicable ? verdict_label(v.finite) : "na");
  }
  std::ostringstream os;
  os << num(r.alpha) << ',' << num(r.moment.value) << ','
     << (r.cov_integral ? num(r.cov_integral->value) : "") << ','
     << (r.second_difference ? num(r.second_difference->integral.value) : "") << ',' << last(r.weighted_pure)
     << ',' << last(r.weighted_shifted) << ',' << verdicts;
  return os.str();
}

}  // namespace apframe
