#pragma once

#include <complex>
#include <cstdint>

namespace apframe {

/// Counter-based Gaussian draws: every variate is a pure function of
/// (seed, stream, kind, index), so replicas and draw order never interact.
class CounterRng {
 public:
  enum class Kind : std::uint64_t { Atom = 1, Bin = 2, Probe = 3 };

  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  /// Uniform in (0, 1) with 53 random bits.
  double uniform(Kind kind, std::uint64_t index, std::uint64_t lane) const;

  /// Standard complex circular Gaussian: real and imaginary parts independent
  /// N(0, 1/2), so E|z|^2 = 1.
  std::complex<double> circular_normal(Kind kind, std::uint64_t index) const;

  /// Standard real normal N(0, 1).
  double normal(Kind kind, std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace apframe
