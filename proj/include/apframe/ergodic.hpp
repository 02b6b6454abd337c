#pragma once

#include <Eigen/Core>

#include <map>
#include <string>
#include <vector>

#include "apframe/frames.hpp"
#include "apframe/process.hpp"
#include "apframe/wavelet.hpp"

namespace apframe {

/// Partial time averages over increasing horizons (T or N).
struct AverageTrace {
  std::vector<double> horizons;
  std::vector<double> partials;
  std::vector<double> standard_errors;
  double estimate = 0.0;
  double standard_error = 0.0;
  /// |partial(last) - partial(second to last)|.
  double cauchy_gap = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr int kBatchCount = 16;

/// Samples f(t0 + k dt), k = 0..n-1.
struct UniformSamples {
  double t0 = 0.0;
  double dt = 1.0;
  Eigen::VectorXcd values;

  double time(Eigen::Index k) const { return t0 + static_cast<double>(k) * dt; }
};

/// Path on the symmetric grid -T..T (plus `extra` beyond T) with step dt.
UniformSamples sample_symmetric(const GaussianProcess& proc, double T, double dt, double extra = 0.0);

/// Largest |lambda| with a nonzero component of the process.
double highest_frequency(const GaussianProcess& proc);

/// (1/2T) int_{-T}^{T} |X|^2 dt by the trapezoid rule, per horizon; SE by
/// batch means over kBatchCount blocks.
AverageTrace b2_norm_continuous(const GaussianProcess& proc, std::vector<double> T_list, double dt);
AverageTrace b2_norm_samples(const UniformSamples& path, std::vector<double> T_list);

/// (1/(2N+1)) sum_{|n| <= N} |x(n)|^2 for samples x indexed n = -Nmax..Nmax.
AverageTrace b2_norm_sequence(const Eigen::VectorXcd& samples, std::vector<int> N_list);

struct ComplexEstimate {
  Complex value;
  double standard_error = 0.0;
};

/// (1/2T) int_{-T}^{T} f(t) conj f(t + tau) dt on a sampled path; tau must be
/// a multiple of dt and the path must cover [-T, T + tau].
ComplexEstimate autocorrelation_samples(const UniformSamples& path, double tau, double T);
ComplexEstimate autocorrelation_estimate(const GaussianProcess& proc, double tau, double T, double dt);

/// (1/2T) int_{-T}^{T} f(t) e^{-i lambda t} dt on a sampled path.
Complex bohr_transform(const UniformSamples& path, double lambda, double T);
/// (1/(2N+1)) sum_{|n| <= N} x(n) e^{-i lambda n b} for x indexed n = -Nmax..Nmax.
Complex bohr_transform_sequence(const Eigen::VectorXcd& samples, double b, double lambda, int N);

/// <X, psi_{j,k}> for k = n b, n = -N..N (L1 normalization):
/// sum conj psi^(a^j lambda) e^{i lambda n b a^j} (w C).
Eigen::VectorXcd coefficient_sequence(const TrigSum& components, const AffineSystem& sys, int j, int N);
Eigen::VectorXcd coefficient_sequence(const GaussianProcess& proc, const AffineSystem& sys, int j, int N);

/// D(lambda, j) keyed by representatives of T_j = [0, 2 pi a^{-j}/b): atoms
/// whose frequencies differ by D_j are merged.
std::map<double, Complex> periodized_coefficients(const TrigSum& components, const AffineSystem& sys, int j);

struct SandwichResult {
  double lhs = 0.0;
  double middle = 0.0;
  double rhs = 0.0;
  double b2 = 0.0;
  double lower_margin = 0.0;
  double upper_margin = 0.0;
  bool holds = true;
  std::vector<double> per_scale;
  std::vector<std::string> warnings;
};

/// A ||X||^2 <= sum_j Cesaro_N |<X, psi_{j,k}>|^2 <= B ||X||^2, with the
/// sandwich accepted when middle lies in [A b2 (1 - tol), B b2 (1 + tol)].
SandwichResult ap_frame_sum(const GaussianProcess& proc, const AffineSystem& sys, JRange j_window, int N,
                            double T, double dt, double A, double B, double tol);

/// int e^{i lambda k a^j} |psi^(a^j lambda)|^2 d mu for lag k in bZ.
Complex coeff_covariance(const AffineSystem& sys, const SpectralMeasure& mu, int j, double k);

struct DecompositionReport {
  double additivity_error = 0.0;
  double norm_total = 0.0;
  double norm_continuous = 0.0;
  double norm_discrete = 0.0;
  Complex cross_term;
  double cross_standard_error = 0.0;
  bool cross_within_3se = true;
};

DecompositionReport decomposition_check(const GaussianProcess& proc, const AffineSystem& sys, int j, int N);

/// Mean and batch-means standard error of a sample sequence.
std::pair<double, double> batch_mean(const Eigen::Ref<const Eigen::VectorXd>& x, int batches = kBatchCount);

}  // namespace apframe
