#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "apframe/rng.hpp"
#include "apframe/spectral.hpp"

namespace apframe {

/// Finite trigonometric sum t -> sum_n coeff[n] e^{i freq[n] t}.
struct TrigSum {
  std::vector<double> freq;
  std::vector<Complex> coeff;

  Complex operator()(double t) const;
  Eigen::VectorXcd evaluate(const std::vector<double>& times) const;
  /// Values at t0 + k*dt, k = 0..count-1, by phasor recurrence re-anchored
  /// exactly every 256 steps.
  Eigen::VectorXcd evaluate_uniform(double t0, double dt, Eigen::Index count) const;
};

enum class ProcessMode { Complex, Real };

struct SynthesisOptions {
  /// Number of equal bins partitioning the density grid; 0 uses one bin per
  /// grid cell.
  Eigen::Index bins = 0;
  ProcessMode mode = ProcessMode::Complex;
};

/// Gaussian draws attached to a spectral measure: C(lambda) per atom with
/// E|C|^2 = mass, Phi(bin) per density bin with E|Phi|^2 = mu(bin).
struct RandomSpectrum {
  std::vector<double> atom_lambda;
  std::vector<Complex> atom_coeff;
  std::vector<double> bin_center;
  std::vector<double> bin_mass;
  std::vector<Complex> bin_increment;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  ProcessMode mode = ProcessMode::Complex;
};

RandomSpectrum draw_spectrum(const SpectralMeasure& mu, std::uint64_t seed,
                             std::uint64_t stream_id, const SynthesisOptions& opt = {});

/// Realization of a circular Gaussian stationary process
/// X(t) = sum_atoms w C e^{i lambda t} + sum_bins w Phi e^{i lambda_bin t}.
class GaussianProcess {
 public:
  GaussianProcess(SpectralMeasure mu, std::shared_ptr<const RandomSpectrum> spectrum,
                  FrequencyResponse weight = {});

  const SpectralMeasure& measure() const { return mu_; }
  const RandomSpectrum& spectrum() const { return *spectrum_; }
  std::shared_ptr<const RandomSpectrum> spectrum_ptr() const { return spectrum_; }
  const FrequencyResponse& weight() const { return weight_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Weighted atom and bin components (w C, w Phi) as one trigonometric sum.
  const TrigSum& components() const { return all_; }
  const TrigSum& discrete_components() const { return discrete_; }
  const TrigSum& continuous_components() const { return continuous_; }

  Complex operator()(double t) const { return all_(t); }

  /// Same random spectrum, frequency weight multiplied by `extra`.
  GaussianProcess filtered(const FrequencyResponse& extra) const;
  /// The process driven by the atoms only (resp. bins only) of the same spectrum.
  GaussianProcess discrete_part() const;
  GaussianProcess continuous_part() const;

  /// Measure of the filtered process, |w|^2 d mu.
  SpectralMeasure filtered_measure() const;

  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  GaussianProcess(SpectralMeasure mu, std::shared_ptr<const RandomSpectrum> spectrum,
                  FrequencyResponse weight, bool keep_atoms, bool keep_bins);
  void build(bool keep_atoms, bool keep_bins);

  SpectralMeasure mu_;
  std::shared_ptr<const RandomSpectrum> spectrum_;
  FrequencyResponse weight_;
  bool keep_atoms_ = true;
  bool keep_bins_ = true;
  TrigSum all_, discrete_, continuous_;
  std::vector<std::string> warnings_;
};

GaussianProcess synthesize(const SpectralMeasure& mu, std::uint64_t seed, std::uint64_t stream_id,
                           const SynthesisOptions& opt = {});

Eigen::VectorXcd sample_path(const GaussianProcess& proc, const std::vector<double>& times);

/// D^alpha X: frequency weight multiplied by |lambda|^alpha, same spectrum.
GaussianProcess fractional_derivative(const GaussianProcess& proc, double alpha);

/// d(alpha) = int (cos u - 1)|u|^{-1-alpha} du (negative), cached per alpha.
double d_alpha(double alpha);

/// Normalized truncated-kernel transform K^_alpha(lambda), K^(0) = 1.
double khat(double alpha, double lambda);

struct HypersingularSample {
  Complex sample;
  double second_moment = 0.0;
};

/// (D^alpha_eps X)(t) in the frequency domain together with
/// E|D^alpha_eps X|^2 = d^2 int |lambda|^{2 alpha} K^(eps lambda)^2 |w|^2 d mu.
HypersingularSample hypersingular_truncated(const GaussianProcess& proc, double alpha, double eps,
                                            double t);

/// The same quantity by direct quadrature of
/// int_{eps <= |h| <= window} (X(t+h) - X(t)) |h|^{-1-alpha} dh, plus the
/// exact -X(t) 2 window^{-alpha}/alpha contribution of |h| > window.
Complex hypersingular_time_domain(const GaussianProcess& proc, double alpha, double eps, double t,
                                  double window);

/// E|(X(t+h) - X(t))/h - D^1 X(t)|^2 = int |(e^{i lambda h} - 1)/h - i lambda|^2 d mu.
double derivative_quotient_error(const SpectralMeasure& mu, double h);

void write_path_csv(const std::string& path, const std::vector<double>& times,
                    const Eigen::VectorXcd& values);

}  // namespace apframe
