#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace singtens {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

/// SplitMix64 finalizer; derives independent stream seeds from (seed, stream).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream = 0) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded source of complex Gaussians and unit-circle phases.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : gen_(mix_seed(seed, stream)) {}

  /// Independent standard-normal real and imaginary parts (E|z|^2 = 2).
  cplx complex_normal() {
    const double re = normal_(gen_);
    const double im = normal_(gen_);
    return {re, im};
  }

  double real_normal() { return normal_(gen_); }

  /// Uniform on the unit circle.
  cplx unit_phase() {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    return std::polar(1.0, angle(gen_));
  }

  CVector complex_vector(std::size_t n) {
    CVector v(n);
    for (auto& z : v) z = complex_normal();
    return v;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace singtens
