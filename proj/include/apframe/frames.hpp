#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apframe/wavelet.hpp"
#include "json.hpp"

namespace apframe {

/// lambda = (2 pi / b) n a^{-m} held exactly, in canonical form (a does not
/// divide n unless n = 0), or an off-lattice real.
class AdicRational {
 public:
  static AdicRational lattice(std::int64_t n, int m, int a);
  static AdicRational off_lattice(double value, int a);

  bool on_lattice() const { return on_lattice_; }
  bool is_zero() const { return on_lattice_ && n_ == 0; }
  std::int64_t numerator() const { return n_; }
  int a_power() const { return m_; }
  int base() const { return a_; }
  double value(double b) const;

  AdicRational operator-(const AdicRational& o) const;
  AdicRational operator+(const AdicRational& o) const;
  /// Multiplication by a (exact).
  AdicRational times_a() const;
  bool operator==(const AdicRational& o) const;

 private:
  AdicRational() = default;
  void canonicalize();

  std::int64_t n_ = 0;
  int m_ = 0;
  int a_ = 2;
  bool on_lattice_ = true;
  double off_value_ = 0.0;
};

struct Valuation {
  enum class Kind { Finite, PlusInfinity, MinusInfinity };
  Kind kind = Kind::Finite;
  int value = 0;

  bool finite() const { return kind == Kind::Finite; }
  /// j >= kappa, i.e. a^j lambda lies in D.
  bool admits(int j) const;
  std::string str() const;
};

/// kappa(lambda) = inf{j : a^j lambda in D}.
Valuation valuation(const AdicRational& lambda);

/// Exact 1_D(a^j lambda), computed by divisibility of the numerator.
bool in_dual_lattice_after_dilation(const AdicRational& lambda, int j);

/// [lambda, lambda']_psi = sum_{j >= kappa, j in window} psi^(a^j lambda) conj psi^(a^j lambda').
/// Band-limited wavelets derive the window from the band when none is given.
Complex affine_product(const AffineSystem& sys, double lambda, double lambda_prime,
                       const Valuation& kappa, std::optional<JRange> window = std::nullopt);
Complex affine_product(const AffineSystem& sys, const AdicRational& lambda,
                       const AdicRational& lambda_prime, std::optional<JRange> window = std::nullopt);

struct GramianFiber {
  double lambda = 0.0;
  std::vector<AdicRational> q_set;
  Eigen::MatrixXcd entries;
  JRange j_window;
};

/// All q in a^{-J} D with |q| <= q_max, ordered by value.
std::vector<AdicRational> default_q_set(const AffineSystem& sys, int J, double q_max);

/// Window covering every active scale of lambda + q over the q_set.
JRange fiber_window(const AffineSystem& sys, double lambda, const std::vector<AdicRational>& q_set);

GramianFiber gramian_fiber(const AffineSystem& sys, double lambda, const std::vector<AdicRational>& q_set,
                           std::optional<JRange> j_window = std::nullopt);

/// Single-scale fiber G_j(lambda)(q, q') = 1_D(a^j(q - q')) psi^(a^j(lambda+q)) conj psi^(a^j(lambda+q')).
Eigen::MatrixXcd gramian_fiber_scale(const AffineSystem& sys, double lambda,
                                     const std::vector<AdicRational>& q_set, int j);

struct RayleighBounds {
  double low = 0.0;
  double high = 0.0;
  double residual_high = 0.0;
  double residual_low = 0.0;
  bool converged = true;
  int iterations = 0;
  std::string caveat;
};

/// Extremal eigenvalue estimates of the truncated Hermitian fiber by power
/// iteration on G and on high*I - G, widened by random Rayleigh probes.
RayleighBounds fiber_rayleigh_bounds(const Eigen::MatrixXcd& g, int trials, std::uint64_t seed);
RayleighBounds fiber_rayleigh_bounds(const GramianFiber& fiber, int trials, std::uint64_t seed);

struct FrameBounds {
  double A = 0.0;
  double B = 0.0;
  double argmin = 0.0;
  double argmax = 0.0;
  std::size_t grid_points = 0;
  bool is_frame = false;
};

/// Essential inf/sup of the Littlewood-Paley sum over lambda_grid \ {0}.
FrameBounds frame_bounds_bandlimited(const AffineSystem& sys, const std::vector<double>& lambda_grid,
                                     double tol = 1e-12);

/// Log-spaced grid +-[lo, hi] with `points` points in total.
std::vector<double> symmetric_log_grid(double lo, double hi, std::size_t points);

nlohmann::json fiber_to_json(const GramianFiber& fiber, double b);

}  // namespace apframe
