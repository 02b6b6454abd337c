#include "apframe/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "apframe/ergodic.hpp"
#include "apframe/frames.hpp"
#include "apframe/parallel.hpp"
#include "apframe/process.hpp"
#include "apframe/smoothness.hpp"
#include "apframe/spectral.hpp"

namespace apframe::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --- config reading -------------------------------------------------------

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

std::vector<double> get_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& prefix) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError(prefix + it.key(), "unknown field");
  }
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(15) << x;
  return os.str();
}

// --- measures and systems --------------------------------------------------

json resolve_measure(const json& spec, const std::string& base_dir) {
  if (spec.is_object() && spec.contains("file")) {
    fs::path p = spec.at("file").get<std::string>();
    if (p.is_relative()) p = fs::path(base_dir) / p;
    std::ifstream in(p);
    if (!in) throw ConfigError("measure.file", "cannot open '" + p.string() + "'");
    return load_config_file(p.string());
  }
  return spec;
}

SpectralMeasure build_measure(const ExperimentConfig& c, const std::string& base_dir) {
  try {
    return measure_from_json(resolve_measure(c.measure, base_dir));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("measure", e.what());
  }
}

AffineSystem build_system(const ExperimentConfig& c) {
  try {
    return AffineSystem(wavelet_from_json(c.wavelet), c.a, c.b);
  } catch (const std::exception& e) {
    throw ConfigError("wavelet", e.what());
  }
}

SynthesisOptions synthesis_options(const ExperimentConfig& c) {
  SynthesisOptions o;
  o.bins = c.bins;
  o.mode = c.mode == "real" ? ProcessMode::Real : ProcessMode::Complex;
  return o;
}

json grids_json(const Grids& g) {
  return {{"lambda", {{"lo", g.lambda_lo}, {"hi", g.lambda_hi}, {"points", g.lambda_points}}},
          {"T", g.T},
          {"dt", g.dt},
          {"N", g.N},
          {"j_window", {g.j_window.lo, g.j_window.hi}},
          {"q_set", {{"J", g.q_J}, {"q_max", g.q_max}}},
          {"fiber_lambdas", g.fiber_lambdas},
          {"eps", g.eps},
          {"tau", g.tau}};
}

std::vector<double> lambda_grid(const ExperimentConfig& c) {
  return symmetric_log_grid(c.grids.lambda_lo, c.grids.lambda_hi, static_cast<std::size_t>(c.grids.lambda_points));
}

void write_text(const fs::path& p, const std::string& text, std::vector<std::string>& files) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
  files.push_back(p.string());
}

struct Outcome {
  json results;
  bool pass = true;
  std::string reason;
  std::vector<std::string> warnings;
};

struct Context {
  const ExperimentConfig& c;
  const RunOptions& opt;
  fs::path out;
  std::string base_dir;
  std::vector<std::string>& files;
};

// --- experiments -----------------------------------------------------------

Outcome frame_bounds_experiment(Context& ctx) {
  const auto& c = ctx.c;
  const AffineSystem sys = build_system(c);
  const auto grid = lambda_grid(c);
  const bool banded = sys.wavelet.band_limited();
  std::vector<LittlewoodPaley> lp(grid.size());
  parallel_for(grid.size(), ctx.opt.threads, [&](std::size_t i) {
    lp[i] = banded ? littlewood_paley(sys, grid[i]) : littlewood_paley(sys, grid[i], c.grids.j_window);
  });
  Outcome o;
  double A = std::numeric_limits<double>::infinity(), B = 0.0, dev = 0.0, tail = 0.0;
  double argmin = 0.0, argmax = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (lp[i].value < A) {
      A = lp[i].value;
      argmin = grid[i];
    }
    if (lp[i].value + lp[i].tail_bound > B) {
      B = lp[i].value + lp[i].tail_bound;
      argmax = grid[i];
    }
    dev = std::max(dev, std::abs(lp[i].value - 1.0));
    tail = std::max(tail, lp[i].tail_bound);
  }
  o.results["littlewood_paley"] = {{"A", A},
                                   {"B", B},
                                   {"argmin", argmin},
                                   {"argmax", argmax},
                                   {"max_deviation_from_one", dev},
                                   {"max_tail_bound", tail},
                                   {"grid_points", grid.size()},
                                   {"band_limited", banded},
                                   {"sampling_condition_asserted", c.sampling_asserted}};
  // The periodization condition on b is taken from the user, not checked.
  if (!c.sampling_asserted) o.warnings.push_back("sampling condition on b not asserted in config (sampling_asserted)");
  if (!banded) o.warnings.push_back("wavelet is not band-limited: sums truncated to the j window plus tail bound");
  const bool is_frame = A > 1e-12;

  // Condition C1 per scale of the window.
  json c1 = json::array();
  for (int j = c.grids.j_window.lo; j <= c.grids.j_window.hi; ++j) {
    const auto s = c1_supremum(sys, j, 4096);
    json e = {{"j", j}, {"sup", s.value}, {"argmax", s.argmax}};
    if (s.within_bound) e["within_declared_bound"] = *s.within_bound;
    c1.push_back(e);
  }
  o.results["c1"] = c1;

  bool fibers_ok = true;
  json fibers = json::array();
  if (!c.grids.fiber_lambdas.empty()) {
    const auto q_set = default_q_set(sys, c.grids.q_J, c.grids.q_max);
    // Nested half-size window, to see how much the truncation moves the bounds.
    const auto q_inner = default_q_set(sys, c.grids.q_J, 0.5 * c.grids.q_max);
    std::vector<json> rows(c.grids.fiber_lambdas.size());
    std::vector<char> ok(rows.size(), 1);
    parallel_for(rows.size(), ctx.opt.threads, [&](std::size_t i) {
      const double lam = c.grids.fiber_lambdas[i];
      const GramianFiber f = gramian_fiber(sys, lam, q_set);
      const RayleighBounds rb = fiber_rayleigh_bounds(f, 16, c.seed + i);
      const RayleighBounds inner = fiber_rayleigh_bounds(gramian_fiber(sys, lam, q_inner), 16, c.seed + i);
      double diag_gap = 0.0;
      for (std::size_t k = 0; k < f.q_set.size(); ++k) {
        const double x = lam + f.q_set[k].value(sys.b);
        if (x == 0.0) continue;
        const double lpv = banded ? littlewood_paley(sys, x).value : littlewood_paley(sys, x, f.j_window).value;
        diag_gap = std::max(diag_gap, std::abs(f.entries(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real() - lpv));
      }
      ok[i] = rb.low >= A - 1e-9 && rb.high <= B + 1e-9;
      rows[i] = {{"lambda", lam},
                 {"size", f.q_set.size()},
                 {"j_window", {f.j_window.lo, f.j_window.hi}},
                 {"rayleigh_low", rb.low},
                 {"rayleigh_high", rb.high},
                 {"residual_low", rb.residual_low},
                 {"residual_high", rb.residual_high},
                 {"converged", rb.converged},
                 {"caveat", rb.caveat},
                 {"diagonal_vs_lp", diag_gap},
                 {"inner_size", q_inner.size()},
                 {"truncation_gap", std::max(std::abs(rb.low - inner.low), std::abs(rb.high - inner.high))},
                 {"within_frame_bounds", static_cast<bool>(ok[i])}};
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
      fibers.push_back(rows[i]);
      fibers_ok = fibers_ok && ok[i];
    }
  }
  o.results["fibers"] = fibers;
  if (!fibers.empty()) {
    std::ostringstream fc;
    fc << "lambda,lp,fiber_low,fiber_high\n";
    for (const auto& r : fibers) {
      const double lam = r["lambda"].get<double>();
      fc << num(lam) << ',' << num(littlewood_paley(sys, lam).value) << ',' << num(r["rayleigh_low"].get<double>()) << ','
         << num(r["rayleigh_high"].get<double>()) << '\n';
    }
    write_text(ctx.out / "fibers.csv", fc.str(), ctx.files);
  }
  o.pass = is_frame && fibers_ok;
  o.reason = !is_frame ? "lower frame bound is zero on the grid"
                       : (!fibers_ok ? "a fiber's Rayleigh bounds fall outside [A, B]" : "frame bounds found");

  std::ostringstream csv;
  csv << "lambda,lp,tail_bound\n";
  for (std::size_t i = 0; i < grid.size(); ++i) csv << num(grid[i]) << ',' << num(lp[i].value) << ',' << num(lp[i].tail_bound) << '\n';
  write_text(ctx.out / "lp.csv", csv.str(), ctx.files);
  if (ctx.opt.plot) {
    Series s{"LP sum", {}, {}};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i] > 0.0) {
        s.x.push_back(grid[i]);
        s.y.push_back(lp[i].value);
      }
    }
    write_svg((ctx.out / "lp.svg").string(), "Littlewood-Paley sum", {s}, true, false);
    ctx.files.push_back((ctx.out / "lp.svg").string());
  }
  return o;
}

std::pair<double, double> resolve_bounds(const ExperimentConfig& c, const AffineSystem& sys) {
  if (c.A && c.B) return {*c.A, *c.B};
  const FrameBounds fb = frame_bounds_bandlimited(sys, lambda_grid(c));
  return {c.A.value_or(fb.A), c.B.value_or(fb.B)};
}

Outcome ap_check_experiment(Context& ctx) {
  const auto& c = ctx.c;
  const AffineSystem sys = build_system(c);
  const SpectralMeasure mu = build_measure(c, ctx.base_dir);
  const auto [A, B] = resolve_bounds(c, sys);
  const auto so = synthesis_options(c);
  std::vector<SandwichResult> res(static_cast<std::size_t>(c.replicas));
  parallel_for(res.size(), ctx.opt.threads, [&](std::size_t r) {
    const GaussianProcess proc = synthesize(mu, c.seed, r, so);
    res[r] = ap_frame_sum(proc, sys, c.grids.j_window, c.grids.N, c.grids.T.front(), c.grids.dt, A, B, c.tolerance);
  });
  Outcome o;
  json reps = json::array();
  int holds = 0;
  std::ostringstream csv;
  csv << "replica,b2,middle,ratio,holds\n";
  Series ratio{"middle / b2", {}, {}};
  for (std::size_t r = 0; r < res.size(); ++r) {
    const auto& s = res[r];
    holds += s.holds;
    const double q = s.b2 > 0.0 ? s.middle / s.b2 : 0.0;
    reps.push_back({{"replica", r},
                    {"b2", s.b2},
                    {"middle", s.middle},
                    {"ratio", q},
                    {"lower_margin", s.lower_margin},
                    {"upper_margin", s.upper_margin},
                    {"per_scale", s.per_scale},
                    {"holds", s.holds}});
    csv << r << ',' << num(s.b2) << ',' << num(s.middle) << ',' << num(q) << ',' << s.holds << '\n';
    ratio.x.push_back(static_cast<double>(r));
    ratio.y.push_back(q);
    if (r == 0) o.warnings.insert(o.warnings.end(), s.warnings.begin(), s.warnings.end());
  }
  const double frac = static_cast<double>(holds) / static_cast<double>(res.size());
  o.results = {{"A", A}, {"B", B}, {"replicas", reps}, {"fraction_holding", frac}};
  o.pass = frac >= c.pass_fraction;
  o.reason = std::to_string(holds) + "/" + std::to_string(res.size()) + " replicas satisfy the sandwich";
  write_text(ctx.out / "replicas.csv", csv.str(), ctx.files);
  if (ctx.opt.plot) {
    write_svg((ctx.out / "ratio.svg").string(), "AP-frame sum over B2 norm", {ratio});
    ctx.files.push_back((ctx.out / "ratio.svg").string());
  }
  return o;
}

Outcome ergodic_experiment(Context& ctx) {
  const auto& c = ctx.c;
  const SpectralMeasure mu = build_measure(c, ctx.base_dir);
  const auto so = synthesis_options(c);
  const auto& Ts = c.grids.T;
  const auto& taus = c.grids.tau;
  const std::size_t nT = Ts.size(), nt = taus.size();
  const std::size_t reps = static_cast<std::size_t>(c.replicas);
  std::vector<ComplexEstimate> est(reps * nT * nt);
  std::vector<AverageTrace> b2(reps);
  parallel_for(reps, ctx.opt.threads, [&](std::size_t r) {
    const GaussianProcess proc = synthesize(mu, c.seed, r, so);
    for (std::size_t i = 0; i < nT; ++i) {
      for (std::size_t k = 0; k < nt; ++k) {
        est[(r * nT + i) * nt + k] = autocorrelation_estimate(proc, taus[k], Ts[i], c.grids.dt);
      }
    }
    b2[r] = b2_norm_continuous(proc, Ts, c.grids.dt);
  });
  Outcome o;
  if (!mu.atoms().empty()) {
    o.warnings.push_back("measure has atoms: time averages converge to a random limit, not to the covariance");
  }
  std::ostringstream csv;
  csv << "replica,T,tau,re,im,se,target_re,target_im\n";
  json per_tau = json::array();
  bool pass = true;
  std::vector<Series> traces;
  for (std::size_t k = 0; k < nt; ++k) {
    // The time average of X(t) conj X(t + tau) tends to R(-tau).
    const Complex target = covariance(mu, -taus[k]);
    std::vector<double> mean_se(nT, 0.0);
    int within = 0;
    Series s{"tau=" + num(taus[k]), {}, {}};
    for (std::size_t i = 0; i < nT; ++i) {
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& e = est[(r * nT + i) * nt + k];
        mean_se[i] += e.standard_error / static_cast<double>(reps);
        if (i + 1 == nT && std::abs(e.value - target) <= 3.0 * e.standard_error) ++within;
        csv << r << ',' << num(Ts[i]) << ',' << num(taus[k]) << ',' << num(e.value.real()) << ','
            << num(e.value.imag()) << ',' << num(e.standard_error) << ',' << num(target.real()) << ','
            << num(target.imag()) << '\n';
      }
      s.x.push_back(Ts[i]);
      s.y.push_back(mean_se[i]);
    }
    traces.push_back(s);
    const double frac = static_cast<double>(within) / static_cast<double>(reps);
    json row = {{"tau", taus[k]},
                {"target", {target.real(), target.imag()}},
                {"fraction_within_3se", frac},
                {"mean_se", mean_se}};
    pass = pass && frac >= c.pass_fraction;
    if (nT >= 2 && mean_se.back() > 0.0) {
      const double shrink = mean_se.front() / mean_se.back();
      const double required = 1.3 * std::sqrt(Ts.back() / Ts.front() / 2.0);
      row["se_shrink"] = shrink;
      row["se_shrink_required"] = required;
      pass = pass && shrink >= required;
    }
    per_tau.push_back(row);
  }
  json norms = json::array();
  for (std::size_t r = 0; r < reps; ++r) {
    norms.push_back({{"replica", r}, {"partials", b2[r].partials}, {"standard_errors", b2[r].standard_errors}});
    if (r == 0) o.warnings.insert(o.warnings.end(), b2[r].warnings.begin(), b2[r].warnings.end());
  }
  o.results = {{"autocorrelation", per_tau}, {"b2_norm", norms}, {"total_mass", mu.total_mass()}};
  o.pass = pass;
  o.reason = pass ? "autocorrelation estimates agree with the covariance" : "autocorrelation check failed";
  write_text(ctx.out / "autocorrelation.csv", csv.str(), ctx.files);
  if (ctx.opt.plot && nT >= 2) {
    write_svg((ctx.out / "se.svg").string(), "mean standard error vs T", traces, true, true);
    ctx.files.push_back((ctx.out / "se.svg").string());
  }
  return o;
}

Outcome smoothness_experiment(Context& ctx) {
  const auto& c = ctx.c;
  const AffineSystem sys = build_system(c);
  const SpectralMeasure mu = build_measure(c, ctx.base_dir);
  SmoothnessOptions so;
  so.window = c.window;
  so.eps0 = c.eps0;
  so.hypersingular_eps = c.grids.eps;
  so.a = c.a;
  std::vector<SmoothnessReport> reps(c.alphas.size());
  parallel_for(reps.size(), ctx.opt.threads, [&](std::size_t i) { reps[i] = smoothness_verdict(mu, sys, c.alphas[i], so); });

  std::vector<json> realized(c.alphas.size());
  if (c.realized_weighted) {
    const GaussianProcess proc = synthesize(mu, c.seed, 0, synthesis_options(c));
    parallel_for(reps.size(), ctx.opt.threads, [&](std::size_t i) {
      json row;
      for (auto [style, name] : {std::pair{WeightStyle::Pure, "pure"}, std::pair{WeightStyle::Shifted, "shifted"}}) {
        const WeightedSum w = weighted_ap_sum(proc, sys, c.alphas[i], style, c.grids.j_window, c.grids.N);
        json e = {{"applicable", w.applicable}, {"value", w.value}, {"expected", w.expected}, {"warnings", w.warnings}};
        if (w.exact) e["exact"] = *w.exact;
        row[name] = e;
      }
      realized[i] = row;
    });
  }
  Outcome o;
  json arr = json::array();
  std::ostringstream csv;
  csv << sweep_csv_header() << '\n';
  Series moment{"moment", {}, {}}, cov{"cov_int", {}, {}}, sd{"sd_int", {}, {}};
  bool consistent = true;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    json j = to_json(reps[i]);
    if (c.realized_weighted) j["weighted_sum_realized"] = realized[i];
    arr.push_back(j);
    csv << sweep_csv_row(reps[i]) << '\n';
    consistent = consistent && reps[i].consistent;
    moment.x.push_back(reps[i].alpha);
    moment.y.push_back(reps[i].moment.value);
    if (reps[i].cov_integral) {
      cov.x.push_back(reps[i].alpha);
      cov.y.push_back(reps[i].cov_integral->value);
    }
    sd.x.push_back(reps[i].alpha);
    sd.y.push_back(reps[i].second_difference->integral.value);
  }
  o.results = {{"sweep", arr},
               {"lambda_max_represented", mu.support_max()},
               {"truncation_bound", mu.truncation_bound()}};
  if (mu.family()) o.results["family"] = *mu.family();
  o.pass = consistent;
  o.reason = consistent ? "verdicts coherent at every alpha" : "inconsistent verdicts flagged";
  write_text(ctx.out / "sweep.csv", csv.str(), ctx.files);
  if (ctx.opt.plot) {
    write_svg((ctx.out / "sweep.svg").string(), "alpha sweep", {moment, cov, sd}, false, true);
    ctx.files.push_back((ctx.out / "sweep.svg").string());
  }
  return o;
}

Outcome simulate_experiment(Context& ctx) {
  const auto& c = ctx.c;
  const SpectralMeasure mu = build_measure(c, ctx.base_dir);
  const auto so = synthesis_options(c);
  const std::size_t reps = static_cast<std::size_t>(c.replicas);
  std::vector<AverageTrace> norms(reps);
  std::vector<std::vector<std::string>> warns(reps);
  UniformSamples first;
  parallel_for(reps, ctx.opt.threads, [&](std::size_t r) {
    const GaussianProcess proc = synthesize(mu, c.seed, r, so);
    UniformSamples path = sample_symmetric(proc, c.grids.T.front(), c.grids.dt);
    norms[r] = b2_norm_samples(path, {c.grids.T.front()});
    warns[r] = proc.warnings();
    if (r == 0) first = std::move(path);
  });
  Outcome o;
  json rows = json::array();
  for (std::size_t r = 0; r < reps; ++r) {
    rows.push_back({{"replica", r}, {"b2_norm", norms[r].estimate}, {"standard_error", norms[r].standard_error}});
  }
  o.warnings = warns.empty() ? std::vector<std::string>{} : warns.front();
  o.results = {{"replicas", rows},
               {"total_mass", mu.total_mass()},
               {"samples", first.values.size()},
               {"lambda_max_represented", mu.support_max()}};
  o.reason = "simulation written";
  std::vector<double> times(static_cast<std::size_t>(first.values.size()));
  for (Eigen::Index k = 0; k < first.values.size(); ++k) times[static_cast<std::size_t>(k)] = first.time(k);
  write_path_csv((ctx.out / "path.csv").string(), times, first.values);
  ctx.files.push_back((ctx.out / "path.csv").string());
  if (ctx.opt.plot) {
    Series s{"Re X", {}, {}};
    const std::size_t stride = std::max<std::size_t>(1, times.size() / 4000);
    for (std::size_t k = 0; k < times.size(); k += stride) {
      s.x.push_back(times[k]);
      s.y.push_back(first.values[static_cast<Eigen::Index>(k)].real());
    }
    write_svg((ctx.out / "path.svg").string(), "sample path (replica 0)", {s});
    ctx.files.push_back((ctx.out / "path.svg").string());
  }
  return o;
}

}  // namespace

// --- public API -------------------------------------------------------------

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path + ": line " + std::to_string(line) + ", column " + std::to_string(col),
                      "malformed JSON");
  }
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected an object");
  reject_unknown(j,
                 {"experiment", "wavelet", "measure", "a", "b", "alpha", "alphas", "grids", "seed", "replicas", "bins",
                  "mode", "tolerance", "pass_fraction", "A", "B", "window", "eps0", "realized_weighted", "sampling_asserted", "report"},
                 "");
  ExperimentConfig c;
  const json* v = find(j, "experiment");
  if (!v || !v->is_string()) throw ConfigError("experiment", "missing or not a string");
  c.experiment = v->get<std::string>();
  if (std::find(experiment_kinds().begin(), experiment_kinds().end(), c.experiment) == experiment_kinds().end()) {
    throw ConfigError("experiment", "unknown kind '" + c.experiment + "'");
  }
  if ((v = find(j, "wavelet"))) c.wavelet = *v;
  if ((v = find(j, "measure"))) c.measure = *v;
  if ((v = find(j, "a"))) c.a = get_int(*v, "a");
  if ((v = find(j, "b"))) c.b = get_number(*v, "b");
  if ((v = find(j, "alpha"))) c.alphas = {get_number(*v, "alpha")};
  if ((v = find(j, "alphas"))) c.alphas = get_numbers(*v, "alphas");
  if ((v = find(j, "seed"))) {
    if (!v->is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = v->get<std::uint64_t>();
  }
  if ((v = find(j, "replicas"))) c.replicas = get_int(*v, "replicas");
  if ((v = find(j, "bins"))) c.bins = get_int(*v, "bins");
  if ((v = find(j, "mode"))) {
    if (!v->is_string()) throw ConfigError("mode", "expected \"complex\" or \"real\"");
    c.mode = v->get<std::string>();
  }
  if ((v = find(j, "tolerance"))) c.tolerance = get_number(*v, "tolerance");
  if ((v = find(j, "pass_fraction"))) c.pass_fraction = get_number(*v, "pass_fraction");
  if ((v = find(j, "A"))) c.A = get_number(*v, "A");
  if ((v = find(j, "B"))) c.B = get_number(*v, "B");
  if ((v = find(j, "window"))) c.window = get_number(*v, "window");
  if ((v = find(j, "eps0"))) c.eps0 = get_number(*v, "eps0");
  if ((v = find(j, "realized_weighted"))) {
    if (!v->is_boolean()) throw ConfigError("realized_weighted", "expected a boolean");
    c.realized_weighted = v->get<bool>();
  }
  if ((v = find(j, "sampling_asserted"))) {
    if (!v->is_boolean()) throw ConfigError("sampling_asserted", "expected a boolean");
    c.sampling_asserted = v->get<bool>();
  }
  if ((v = find(j, "report"))) {
    if (!v->is_string()) throw ConfigError("report", "expected a file name");
    c.report = v->get<std::string>();
  }
  if (const json* g = find(j, "grids")) {
    if (!g->is_object()) throw ConfigError("grids", "expected an object");
    reject_unknown(*g, {"lambda", "T", "dt", "N", "j_window", "q_set", "fiber_lambdas", "eps", "tau"}, "grids.");
    auto& G = c.grids;
    if ((v = find(*g, "lambda"))) {
      if (!v->is_object()) throw ConfigError("grids.lambda", "expected {lo, hi, points}");
      reject_unknown(*v, {"lo", "hi", "points"}, "grids.lambda.");
      if (const json* w = find(*v, "lo")) G.lambda_lo = get_number(*w, "grids.lambda.lo");
      if (const json* w = find(*v, "hi")) G.lambda_hi = get_number(*w, "grids.lambda.hi");
      if (const json* w = find(*v, "points")) G.lambda_points = get_int(*w, "grids.lambda.points");
    }
    if ((v = find(*g, "T"))) G.T = v->is_array() ? get_numbers(*v, "grids.T") : std::vector<double>{get_number(*v, "grids.T")};
    if ((v = find(*g, "dt"))) G.dt = get_number(*v, "grids.dt");
    if ((v = find(*g, "N"))) G.N = get_int(*v, "grids.N");
    if ((v = find(*g, "j_window"))) {
      if (!v->is_array() || v->size() != 2) throw ConfigError("grids.j_window", "expected [lo, hi]");
      G.j_window = {get_int((*v)[0], "grids.j_window[0]"), get_int((*v)[1], "grids.j_window[1]")};
    }
    if ((v = find(*g, "q_set"))) {
      if (!v->is_object()) throw ConfigError("grids.q_set", "expected {J, q_max}");
      reject_unknown(*v, {"J", "q_max"}, "grids.q_set.");
      if (const json* w = find(*v, "J")) G.q_J = get_int(*w, "grids.q_set.J");
      if (const json* w = find(*v, "q_max")) G.q_max = get_number(*w, "grids.q_set.q_max");
    }
    if ((v = find(*g, "fiber_lambdas"))) G.fiber_lambdas = get_numbers(*v, "grids.fiber_lambdas");
    if ((v = find(*g, "eps"))) G.eps = get_numbers(*v, "grids.eps");
    if ((v = find(*g, "tau"))) G.tau = get_numbers(*v, "grids.tau");
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j = {{"experiment", c.experiment},
            {"a", c.a},
            {"b", c.b},
            {"alphas", c.alphas},
            {"grids", grids_json(c.grids)},
            {"seed", c.seed},
            {"replicas", c.replicas},
            {"bins", c.bins},
            {"mode", c.mode},
            {"tolerance", c.tolerance},
            {"pass_fraction", c.pass_fraction},
            {"window", c.window},
            {"eps0", c.eps0},
            {"realized_weighted", c.realized_weighted},
            {"sampling_asserted", c.sampling_asserted},
            {"report", c.report}};
  if (!c.wavelet.is_null()) j["wavelet"] = c.wavelet;
  if (!c.measure.is_null()) j["measure"] = c.measure;
  if (c.A) j["A"] = *c.A;
  if (c.B) j["B"] = *c.B;
  return j;
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> validate(const json& raw, const std::string& base_dir) {
  std::vector<std::string> d;
  ExperimentConfig c;
  try {
    c = config_from_json(raw);
  } catch (const ConfigError& e) {
    d.push_back(e.what());
    return d;
  }
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) d.push_back(msg);
  };
  const std::string& k = c.experiment;
  const bool wants_wavelet = k == "frame-bounds" || k == "ap-check" || k == "smoothness";
  const bool wants_measure = k != "frame-bounds";
  need(c.a >= 2, "a: must be an integer >= 2");
  need(c.b > 0.0, "b: must be positive");
  need(c.replicas >= 1 && c.replicas <= 100000, "replicas: must lie in [1, 100000]");
  need(c.bins >= 0, "bins: must be nonnegative");
  need(c.mode == "complex" || c.mode == "real", "mode: expected \"complex\" or \"real\"");
  need(c.tolerance >= 0.0, "tolerance: must be nonnegative");
  need(c.pass_fraction > 0.0 && c.pass_fraction <= 1.0, "pass_fraction: must lie in (0, 1]");
  need(c.eps0 > 0.0 && c.eps0 < 1.0, "eps0: must lie in (0, 1)");
  need(c.window > 1.0, "window: must exceed 1");
  need(!c.A || *c.A >= 0.0, "A: must be nonnegative");
  need(!c.B || !c.A || *c.B >= *c.A, "B: must be at least A");
  const auto& G = c.grids;
  need(G.lambda_lo > 0.0 && G.lambda_hi > G.lambda_lo, "grids.lambda: need 0 < lo < hi");
  need(G.lambda_points >= 2 && G.lambda_points <= 10000000, "grids.lambda.points: must lie in [2, 1e7]");
  need(!G.T.empty(), "grids.T: at least one horizon");
  for (std::size_t i = 0; i < G.T.size(); ++i) {
    need(G.T[i] > 0.0 && (i == 0 || G.T[i] > G.T[i - 1]), "grids.T: horizons must be positive and increasing");
  }
  need(G.dt > 0.0, "grids.dt: must be positive");
  need(G.N >= 1, "grids.N: must be positive");
  need(G.j_window.lo <= G.j_window.hi, "grids.j_window: need lo <= hi");
  need(G.q_J >= 0 && G.q_max > 0.0, "grids.q_set: need J >= 0 and q_max > 0");
  for (std::size_t i = 0; i < G.eps.size(); ++i) {
    need(G.eps[i] > 0.0 && G.eps[i] < 1.0 && (i == 0 || G.eps[i] < G.eps[i - 1]),
         "grids.eps: must decrease within (0, 1)");
  }
  if (k == "smoothness") {
    need(!c.alphas.empty(), "alphas: smoothness needs at least one alpha");
    for (double a : c.alphas) {
      need(a > 0.0 && a < 2.0, "alpha " + num(a) + ": must lie in (0, 2)");
      if (c.realized_weighted) need(a < 1.0, "alpha " + num(a) + ": the weighted sum needs alpha in (0, 1)");
    }
  } else {
    for (double a : c.alphas) need(a > 0.0 && a < 1.0, "alpha " + num(a) + ": must lie in (0, 1)");
  }
  if (wants_wavelet) {
    if (c.wavelet.is_null()) {
      d.push_back("wavelet: missing");
    } else {
      try {
        (void)wavelet_from_json(c.wavelet);
      } catch (const std::exception& e) {
        d.push_back(std::string("wavelet: ") + e.what());
      }
    }
  }
  if (wants_measure) {
    if (c.measure.is_null()) {
      d.push_back("measure: missing");
    } else if (c.measure.is_object() && c.measure.contains("file")) {
      fs::path p = c.measure.at("file").is_string() ? c.measure.at("file").get<std::string>() : "";
      if (p.is_relative()) p = fs::path(base_dir) / p;
      need(fs::exists(p), "measure.file: '" + p.string() + "' does not exist");
    } else {
      try {
        const SpectralMeasure mu = measure_from_json(c.measure);
        need(c.mode != "real" || mu.declared_symmetric(), "mode: real synthesis needs a symmetric measure");
      } catch (const std::exception& e) {
        d.push_back(std::string("measure: ") + e.what());
      }
    }
  }
  return d;
}

RunResult run(const ExperimentConfig& config, const RunOptions& opt, const std::string& base_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult rr;
  fs::create_directories(opt.out_dir);
  Context ctx{config, opt, fs::path(opt.out_dir), base_dir, rr.files};
  Outcome o;
  const std::string& k = config.experiment;
  if (k == "frame-bounds") {
    o = frame_bounds_experiment(ctx);
  } else if (k == "ap-check") {
    o = ap_check_experiment(ctx);
  } else if (k == "ergodic") {
    o = ergodic_experiment(ctx);
  } else if (k == "smoothness") {
    o = smoothness_experiment(ctx);
  } else if (k == "simulate") {
    o = simulate_experiment(ctx);
  } else {
    throw ConfigError("experiment", "unknown kind '" + k + "'");
  }
  json rep;
  rep["apframe_version"] = APFRAME_VERSION;
  rep["experiment"] = k;
  rep["config_hash"] = hex64(config_hash(config));
  rep["seed"] = config.seed;
  rep["grids"] = grids_json(config.grids);
  rep["config"] = to_json(config);
  rep["results"] = o.results;
  rep["warnings"] = o.warnings;
  rep["verdict"] = {{"pass", o.pass}, {"reason", o.reason}};
  rr.report = rep;
  rr.exit_code = o.pass ? 0 : 2;
  const fs::path report_path = ctx.out / config.report;
  write_text(report_path, rep.dump(2) + "\n", rr.files);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  json meta = {{"report", config.report}, {"timestamp", stamp}, {"threads", opt.threads}, {"wall_seconds", wall}};
  fs::path meta_path = report_path;
  meta_path.replace_extension(".meta.json");
  write_text(meta_path, meta.dump(2) + "\n", rr.files);
  return rr;
}

void write_svg(const std::string& path, const std::string& title, const std::vector<Series>& series, bool log_x,
               bool log_y) {
  const double W = 640, H = 400, L = 70, R = 20, T = 40, Bm = 50;
  auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
  auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((log_x && s.x[i] <= 0) || (log_y && s.y[i] <= 0) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (x0 > x1) x0 = 0, x1 = 1;
  if (y0 > y1) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12 * std::max(1.0, std::abs(y0))) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - Bm - (ty(y) - y0) / (y1 - y0) * (H - T - Bm); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - Bm << "\" x2=\"" << W - R << "\" y2=\"" << H - Bm
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - Bm << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    const double vx = log_x ? std::pow(10.0, fx) : fx, vy = log_y ? std::pow(10.0, fy) : fy;
    out << "<text x=\"" << px(vx) << "\" y=\"" << H - Bm + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
        << std::setprecision(3) << vx << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << py(vy) + 3 << "\" text-anchor=\"end\" font-size=\"10\">"
        << std::setprecision(3) << vy << "</text>\n";
  }
  out << std::setprecision(6);
  for (std::size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[s % 6] << "\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      const double x = series[s].x[i], y = series[s].y[i];
      if ((log_x && x <= 0) || (log_y && y <= 0) || !std::isfinite(y)) continue;
      out << px(x) << ',' << py(y) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (s + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
        << colors[s % 6] << "\">" << series[s].name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace apframe::cli
