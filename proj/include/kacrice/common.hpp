#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace kacrice {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Extended real for spectral moments: finite value or +infinity, never a
// sentinel float. An infinite lambda_2 must route callers to the divergent
// branch, not into NaN arithmetic.
class ExtendedReal {
 public:
  ExtendedReal() : value_(0.0), finite_(true) {}
  static ExtendedReal finite(double v) {
    ExtendedReal e;
    e.value_ = v;
    e.finite_ = true;
    return e;
  }
  static ExtendedReal infinity() {
    ExtendedReal e;
    e.value_ = std::numeric_limits<double>::infinity();
    e.finite_ = false;
    return e;
  }
  bool is_finite() const { return finite_; }
  double value() const {
    if (!finite_) throw Error("extended real is infinite");
    return value_;
  }
  // Collapses to a float for printing; infinity maps to inf.
  double as_double() const { return finite_ ? value_ : std::numeric_limits<double>::infinity(); }

 private:
  double value_;
  bool finite_;
};

inline double sq(double x) { return x * x; }

// Standard normal density and distribution.
inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) * 0.3989422804014326779; }
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

// --- Deterministic RNG -----------------------------------------------------
//
// Counter-based seed derivation: replicate r of a run with base seed s uses
// derive_seed(s, r), so replicates are independent and order-insensitive.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ splitmix64(index * 0x9E3779B97F4A7C15ULL + 1));
}

// xoshiro256++ core with Box-Muller normals. Self-contained so that streams
// are bit-reproducible across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x++);
  }

  std::uint64_t next_u64() {
    auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on (0,1]; never returns 0 so log() is safe.
  double uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586477 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// --- Streaming statistics --------------------------------------------------

class OnlineStats {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }
  double standard_error() const {
    return n_ > 0 ? stddev() / std::sqrt(static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline double z_score(double mc_mean, double analytic, double mc_se) {
  if (mc_se <= 0.0) return 0.0;
  return (mc_mean - analytic) / mc_se;
}

}  // namespace kacrice
