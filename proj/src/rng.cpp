#include "apframe/rng.hpp"

#include <cmath>
#include <numbers>

namespace apframe {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double CounterRng::uniform(Kind kind, std::uint64_t index, std::uint64_t lane) const {
  std::uint64_t h = splitmix64(seed_);
  h = splitmix64(h ^ stream_);
  h = splitmix64(h ^ static_cast<std::uint64_t>(kind));
  h = splitmix64(h ^ index);
  h = splitmix64(h ^ lane);
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

std::complex<double> CounterRng::circular_normal(Kind kind, std::uint64_t index) const {
  // Box-Muller: radius sqrt(-log u) gives E|z|^2 = 1.
  const double u1 = uniform(kind, index, 0);
  const double u2 = uniform(kind, index, 1);
  const double r = std::sqrt(-std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

double CounterRng::normal(Kind kind, std::uint64_t index) const {
  return std::sqrt(2.0) * circular_normal(kind, index).real();
}

}  // namespace apframe
