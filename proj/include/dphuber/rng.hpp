#pragma once

#include "dphuber/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace dphuber {

// splitmix64 finalizer; used to derive engine seeds and substream ids.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Identifies one logical noise stream.  Identical (seed, stream_id) pairs
// reproduce identical sample sequences; distinct substreams may be consumed
// concurrently, a single stream must not be shared between tasks.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  RngStream substream(std::uint64_t id) const {
    return RngStream{seed, mix64(stream_id ^ mix64(id + 0x51ed2701u))};
  }
};

// Deterministic sampler over an RngStream.  The engine (mt19937_64) is fully
// specified by the standard and all transforms below are written out
// explicitly, so sequences replay bit-for-bit on any platform with IEEE
// doubles and the same libm rounding.
class Rng {
 public:
  explicit Rng(RngStream stream)
      : stream_(stream), engine_(mix64(stream.seed ^ mix64(stream.stream_id))) {}

  const RngStream& stream() const { return stream_; }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  // Laplace(scale) by inverting the CDF.  scale == 0 yields exactly 0 and
  // consumes no randomness, which is the zero-noise path used by the
  // non-private benchmarks.
  double laplace(double scale) {
    if (scale == 0.0) return 0.0;
    const double u = uniform() - 0.5;
    return -scale * (u > 0 ? 1.0 : -1.0) * std::log1p(-2.0 * std::abs(u));
  }

  // Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 handled with the
  // usual u^{1/shape} boost.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

  // Student-t with dof degrees of freedom: Z / sqrt(V / dof).
  double student_t(double dof) {
    const double z = normal();
    const double v = chi_square(dof);
    return z / std::sqrt(v / dof);
  }

 private:
  RngStream stream_;
  std::mt19937_64 engine_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace dphuber
