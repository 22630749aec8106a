#pragma once

#include <cmath>
#include <vector>

#include "kacrice/common.hpp"

namespace kacrice {

inline constexpr int kHermiteOrderCap = 160;

// Probabilists' Hermite polynomial H_k(x), three-term recurrence
// H_{k+1} = x H_k - k H_{k-1}.
inline double hermite_eval(int k, double x) {
  if (k < 0) throw Error("hermite order must be nonnegative");
  if (k > kHermiteOrderCap) throw Error("order too large");
  if (k == 0) return 1.0;
  double h0 = 1.0, h1 = x;
  for (int j = 1; j < k; ++j) {
    const double h2 = x * h1 - static_cast<double>(j) * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

// Normalized polynomials h_k = H_k / sqrt(k!); the recurrence
// h_{k+1} = (x h_k - sqrt(k) h_{k-1}) / sqrt(k+1) stays bounded for
// moderate x, so long expansions do not overflow.
inline void hermite_normalized_all(int kmax, double x, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(kmax) + 1);
  out[0] = 1.0;
  if (kmax == 0) return;
  out[1] = x;
  for (int k = 1; k < kmax; ++k) {
    out[k + 1] = (x * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) /
                 std::sqrt(static_cast<double>(k + 1));
  }
}

inline double factorial(int k) {
  if (k < 0 || k > 170) throw Error("factorial out of double range");
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

// E[H_k(Z) H_l(W)] = delta_{kl} omega^k k! for standard Gaussians with
// correlation omega.
inline double mehler_cross_moment(int k, int l, double omega) {
  if (std::abs(omega) > 1.0) throw Error("mehler: |omega| must be <= 1");
  if (k < 0 || l < 0) throw Error("mehler: orders must be nonnegative");
  if (k != l) return 0.0;
  return std::pow(omega, k) * factorial(k);
}

// Hermite expansion coefficients of x -> |x - m| in L^2(phi dx):
//   a_0 = m(2 Phi(m) - 1) + 2 phi(m)
//   a_1 = 1 - 2 Phi(m)
//   a_l = (2 / l!) H_{l-2}(m) phi(m),  l >= 2.
inline std::vector<double> abs_hermite_coeffs(double m, int K) {
  if (K < 2) throw Error("abs_hermite_coeffs: K must be >= 2");
  if (K > kHermiteOrderCap) throw Error("order too large");
  std::vector<double> a(static_cast<std::size_t>(K) + 1);
  const double pm = normal_pdf(m);
  a[0] = m * (2.0 * normal_cdf(m) - 1.0) + 2.0 * pm;
  a[1] = 1.0 - 2.0 * normal_cdf(m);
  double h0 = 1.0, h1 = m;  // h0 = H_{l-2}(m), h1 = H_{l-1}(m)
  double lfact = 2.0;       // l!
  for (int l = 2; l <= K; ++l) {
    a[static_cast<std::size_t>(l)] = 2.0 / lfact * h0 * pm;
    const double h2 = m * h1 - static_cast<double>(l - 1) * h0;
    h0 = h1;
    h1 = h2;
    lfact *= (l + 1);
  }
  return a;
}

// Truncated Hermite series sum c_k H_k with the weighted-norm bookkeeping
// sum c_k^2 k! used for Parseval checks and tail-mass reports.
struct HermiteSeries {
  std::vector<double> coefficients;

  double eval(double x) const {
    double s = 0.0, h0 = 1.0, h1 = x;
    const int K = static_cast<int>(coefficients.size()) - 1;
    for (int k = 0; k <= K; ++k) {
      const double hk = (k == 0) ? 1.0 : h1;
      s += coefficients[static_cast<std::size_t>(k)] * hk;
      if (k >= 1) {
        const double h2 = x * h1 - static_cast<double>(k) * h0;
        h0 = h1;
        h1 = h2;
      }
    }
    return s;
  }

  double weighted_norm_sq() const {
    double s = 0.0, kf = 1.0;
    for (std::size_t k = 0; k < coefficients.size(); ++k) {
      if (k > 0) kf *= static_cast<double>(k);
      s += sq(coefficients[k]) * kf;
    }
    return s;
  }
};

inline HermiteSeries abs_hermite_series(double m, int K = 40) {
  return HermiteSeries{abs_hermite_coeffs(m, K)};
}

// Tail mass sum_{k>K} a_k(m)^2 k! of the |x-m| expansion, exact via
// Parseval: the full weighted norm is E|Z-m|^2 = 1 + m^2.
inline double abs_hermite_tail_mass(double m, int K) {
  const HermiteSeries s{abs_hermite_coeffs(m, K)};
  return 1.0 + m * m - s.weighted_norm_sq();
}

// theta_d = E ||N(0, I_d)|| = sqrt(2) Gamma((d+1)/2) / Gamma(d/2).
inline double halfnorm_constant(int d) {
  if (d < 1) throw Error("halfnorm_constant: d must be >= 1");
  return std::exp(0.5 * std::log(2.0) + std::lgamma(0.5 * (d + 1)) - std::lgamma(0.5 * d));
}

}  // namespace kacrice
