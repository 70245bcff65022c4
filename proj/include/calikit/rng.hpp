#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace calikit {

// Deterministic splittable PRNG. Streams are derived from a (seed, key...)
// tuple, so each Monte Carlo repetition owns an independent stream whose
// output does not depend on execution order or worker count.
//
// Core generator is splitmix64; variates are built on top of it
// (Box-Muller normals, Marsaglia-Tsang gammas, inverse-CDF categorical).
class StreamRng {
 public:
  explicit StreamRng(std::uint64_t seed) : state_(mix64(seed ^ kPhi)) {}

  // Derives an independent stream from a seed plus key words
  // (e.g. {n, c, bits(delta_1), rep}).
  static StreamRng keyed(std::uint64_t seed, std::span<const std::uint64_t> key) {
    std::uint64_t h = mix64(seed ^ kPhi);
    for (std::uint64_t w : key) h = mix64(h ^ mix64(w + kPhi));
    StreamRng rng(0);
    rng.state_ = h;
    return rng;
  }
  static StreamRng keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
    return keyed(seed, std::span<const std::uint64_t>(key.begin(), key.size()));
  }

  std::uint64_t next_u64() {
    state_ += kPhi;
    return mix64_raw(state_);
  }

  // Uniform on the open interval (0, 1); never returns an endpoint, so
  // log(u) and inverse-CDF lookups are always safe.
  double uniform01() {
    const std::uint64_t bits = next_u64() >> 12;  // 52 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled with the
  // Gamma(shape+1) boost.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform01(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Symmetric Dirichlet(alpha, ..., alpha) via normalized gammas.
  std::vector<double> dirichlet(int c, double alpha) {
    std::vector<double> out(static_cast<std::size_t>(c));
    double total = 0.0;
    for (auto& v : out) {
      v = gamma(alpha);
      total += v;
    }
    for (auto& v : out) v /= total;
    return out;
  }

  // Inverse-CDF draw from a probability row (assumed to sum to ~1).
  int categorical(std::span<const double> probs) {
    const double u = uniform01();
    double cum = 0.0;
    for (std::size_t j = 0; j + 1 < probs.size(); ++j) {
      cum += probs[j];
      if (u <= cum) return static_cast<int>(j);
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  static constexpr std::uint64_t kPhi = 0x9e3779b97f4a7c15ULL;
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t mix64_raw(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t mix64(std::uint64_t z) { return mix64_raw(z + kPhi); }

  std::uint64_t state_;
};

}  // namespace calikit
