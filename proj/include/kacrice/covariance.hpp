#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "kacrice/common.hpp"

namespace kacrice {

// Stationary covariance r(tau) in 1-D, or the radial profile r(||tau||) of an
// isotropic field. Families ship analytic derivatives up to order 4 where
// they exist and a cancellation-free 1 - r(tau)/r(0); both matter because the
// second-moment integrands probe r near tau = 0 far below float resolution.
class CovarianceModel {
 public:
  struct Impl {
    virtual ~Impl() = default;
    virtual double r(double tau, int order) const = 0;
    virtual double one_minus_r_normalized(double tau) const {
      return (r(0.0, 0) - r(tau, 0)) / r(0.0, 0);
    }
    std::string id;
    ExtendedReal lambda0 = ExtendedReal::finite(1.0);
    ExtendedReal lambda2 = ExtendedReal::infinity();
    ExtendedReal lambda4 = ExtendedReal::infinity();
    bool purely_discrete = false;
    bool approximate = false;
    double tau_scale = 1.0;
  };

  explicit CovarianceModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  double operator()(double tau, int order = 0) const {
    if (order < 0 || order > 4) throw Error("covariance derivative order must be in 0..4");
    return impl_->r(tau, order);
  }
  // (r(0) - r(tau)) / r(0), computed without catastrophic cancellation.
  double one_minus_r(double tau) const { return impl_->one_minus_r_normalized(tau); }

  const std::string& id() const { return impl_->id; }
  ExtendedReal lambda0() const { return impl_->lambda0; }
  ExtendedReal lambda2() const { return impl_->lambda2; }
  ExtendedReal lambda4() const { return impl_->lambda4; }
  bool purely_discrete() const { return impl_->purely_discrete; }
  bool approximate() const { return impl_->approximate; }
  double tau_scale() const { return impl_->tau_scale; }

  static CovarianceModel gaussian(double sigma = 1.0);
  static CovarianceModel sinc();
  static CovarianceModel cosine_plus_noise(double weight, double freq, double sigma = 1.0);
  static CovarianceModel powered_exponential(double alpha);
  static CovarianceModel log_divergent(double lambda2, double c);
  static CovarianceModel bessel_wave(double k0);
  static CovarianceModel from_table(const std::vector<double>& taus,
                                    const std::vector<double>& values);

 private:
  std::shared_ptr<const Impl> impl_;
};

namespace detail {

struct GaussianCov final : CovarianceModel::Impl {
  double s2;  // sigma^2
  explicit GaussianCov(double sigma) : s2(sigma * sigma) {
    id = "gaussian";
    lambda0 = ExtendedReal::finite(1.0);
    lambda2 = ExtendedReal::finite(1.0 / s2);
    lambda4 = ExtendedReal::finite(3.0 / (s2 * s2));
    tau_scale = sigma;
  }
  double r(double t, int order) const override {
    const double e = std::exp(-0.5 * t * t / s2);
    switch (order) {
      case 0: return e;
      case 1: return -t / s2 * e;
      case 2: return (t * t / (s2 * s2) - 1.0 / s2) * e;
      case 3: return (3.0 * t / (s2 * s2) - t * t * t / (s2 * s2 * s2)) * e;
      case 4:
        return (3.0 / (s2 * s2) - 6.0 * t * t / (s2 * s2 * s2) +
                t * t * t * t / (s2 * s2 * s2 * s2)) * e;
    }
    throw Error("bad order");
  }
  double one_minus_r_normalized(double t) const override { return -std::expm1(-0.5 * t * t / s2); }
};

struct SincCov final : CovarianceModel::Impl {
  SincCov() {
    id = "sinc";
    lambda0 = ExtendedReal::finite(1.0);
    lambda2 = ExtendedReal::finite(1.0 / 3.0);
    lambda4 = ExtendedReal::finite(1.0 / 5.0);
  }
  // sin(t)/t = sum (-1)^k t^{2k} / (2k+1)!; derivatives termwise for |t|<0.5.
  static double series(double t, int order) {
    double sum = 0.0, c = 1.0;  // c = (-1)^k / (2k+1)!
    for (int k = 0; k <= 12; ++k) {
      const int p = 2 * k;
      if (p >= order) {
        double term = c;
        for (int j = 0; j < order; ++j) term *= (p - j);
        term *= std::pow(t, p - order);
        sum += term;
      }
      c = -c / ((2 * k + 2.0) * (2 * k + 3.0));
    }
    return sum;
  }
  double r(double t, int order) const override {
    const double a = std::abs(t);
    const double sg = (t < 0 && (order % 2 == 1)) ? -1.0 : 1.0;
    if (a < 0.5) return sg * series(a, order);
    const double s = std::sin(a), cc = std::cos(a);
    const double i1 = 1.0 / a, i2 = i1 * i1, i3 = i2 * i1, i4 = i2 * i2, i5 = i4 * i1;
    switch (order) {
      case 0: return s * i1;
      case 1: return sg * (cc * i1 - s * i2);
      case 2: return -s * i1 - 2.0 * cc * i2 + 2.0 * s * i3;
      case 3: return sg * (-cc * i1 + 3.0 * s * i2 + 6.0 * cc * i3 - 6.0 * s * i4);
      case 4: return s * i1 + 4.0 * cc * i2 - 12.0 * s * i3 - 24.0 * cc * i4 + 24.0 * s * i5;
    }
    throw Error("bad order");
  }
  double one_minus_r_normalized(double t) const override {
    const double a = std::abs(t);
    if (a >= 0.5) return 1.0 - std::sin(a) / a;
    // 1 - sinc = t^2/6 - t^4/120 + ...
    double sum = 0.0, c = -1.0 / 6.0;
    for (int k = 1; k <= 12; ++k) {
      sum -= c * std::pow(a, 2 * k);
      c = -c / ((2 * k + 2.0) * (2 * k + 3.0));
    }
    return sum;
  }
};

struct CosineNoiseCov final : CovarianceModel::Impl {
  double w, nu, s2;
  CosineNoiseCov(double weight, double freq, double sigma) : w(weight), nu(freq), s2(sigma * sigma) {
    if (w < 0.0 || w > 1.0) throw Error("cosine+noise: weight must be in [0,1]");
    id = "cosine+noise";
    purely_discrete = (w >= 1.0);
    lambda0 = ExtendedReal::finite(1.0);
    lambda2 = ExtendedReal::finite(w * nu * nu + (1.0 - w) / s2);
    lambda4 = ExtendedReal::finite(w * nu * nu * nu * nu + 3.0 * (1.0 - w) / (s2 * s2));
    tau_scale = std::min(1.0 / nu, std::sqrt(s2));
  }
  double r(double t, int order) const override {
    const double x = nu * t;
    double cosine;
    switch (order % 4) {
      case 0: cosine = std::cos(x); break;
      case 1: cosine = -std::sin(x); break;
      case 2: cosine = -std::cos(x); break;
      default: cosine = std::sin(x); break;
    }
    cosine *= std::pow(nu, order);
    GaussianCov g(std::sqrt(s2));
    return w * cosine + (1.0 - w) * g.r(t, order);
  }
  double one_minus_r_normalized(double t) const override {
    const double x = nu * t;
    // 1 - cos x = 2 sin^2(x/2), stable at small x.
    const double omc = 2.0 * sq(std::sin(0.5 * x));
    return w * omc + (1.0 - w) * (-std::expm1(-0.5 * t * t / s2));
  }
};

// r(t) = exp(-|t|^{2 alpha}), the fractional family: r(0) - r(t) =
// |t|^{2 alpha} L(|t|) with L(x) = (1 - exp(-x^{2 alpha})) / x^{2 alpha},
// L(0+) = C_L = 1. For alpha < 1 the second spectral moment is infinite.
struct PoweredExpCov final : CovarianceModel::Impl {
  double alpha;
  explicit PoweredExpCov(double a) : alpha(a) {
    if (a <= 0.0 || a >= 1.0) throw Error("powered_exponential: alpha must be in (0,1)");
    id = "fractional";
    lambda0 = ExtendedReal::finite(1.0);
    lambda2 = ExtendedReal::infinity();
    lambda4 = ExtendedReal::infinity();
  }
  double r(double t, int order) const override {
    const double a = std::abs(t);
    const double b = 2.0 * alpha;
    if (order == 0) return std::exp(-std::pow(a, b));
    if (a == 0.0) throw Error("fractional covariance not differentiable at 0");
    const double sg = (t < 0 && (order % 2 == 1)) ? -1.0 : 1.0;
    const double p = std::pow(a, b);
    const double e = std::exp(-p);
    if (order == 1) return sg * (-b * std::pow(a, b - 1.0) * e);
    if (order == 2) {
      // d^2/dt^2 exp(-t^b) = e [b^2 t^{2b-2} - b(b-1) t^{b-2}]
      return e * (b * b * std::pow(a, 2.0 * b - 2.0) - b * (b - 1.0) * std::pow(a, b - 2.0));
    }
    throw Error("fractional covariance: derivative order > 2 not available");
  }
  double one_minus_r_normalized(double t) const override {
    return -std::expm1(-std::pow(std::abs(t), 2.0 * alpha));
  }
  double c_l() const { return 1.0; }
};

// Synthetic classifier stressor: r''(tau) - r''(0) ~ 2c / ln(1/tau), so the
// Geman integral diverges (log-log slowly). Not a valid covariance; it exists
// only to exercise the DIVERGENT branch. Domain |tau| <= 0.5.
struct LogDivergentCov final : CovarianceModel::Impl {
  double l2, c;
  LogDivergentCov(double lambda2_, double c_) : l2(lambda2_), c(c_) {
    id = "log-divergent";
    lambda0 = ExtendedReal::finite(1.0);
    lambda2 = ExtendedReal::finite(l2);
    lambda4 = ExtendedReal::infinity();
  }
  double r(double t, int order) const override {
    const double a = std::abs(t);
    if (a > 0.5) throw Error("log-divergent model only defined for |tau| <= 0.5");
    const double sg = (t < 0 && (order % 2 == 1)) ? -1.0 : 1.0;
    if (a == 0.0) {
      if (order == 0) return 1.0;
      if (order == 1) return 0.0;
      if (order == 2) return -l2;
      throw Error("log-divergent: derivative order > 2 not available");
    }
    const double u = std::log(1.0 / a);
    switch (order) {
      case 0: return 1.0 - 0.5 * l2 * a * a + c * a * a / u;
      case 1: return sg * (-l2 * a + c * (2.0 * a / u + a / (u * u)));
      case 2: return -l2 + c * (2.0 / u + 3.0 / (u * u) + 2.0 / (u * u * u));
    }
    throw Error("log-divergent: derivative order > 2 not available");
  }
  double one_minus_r_normalized(double t) const override {
    const double a = std::abs(t);
    if (a == 0.0) return 0.0;
    const double u = std::log(1.0 / a);
    return a * a * (0.5 * l2 - c / u);
  }
};

// Isotropic random-wave covariance J_0(k0 rho); spectrum on the circle of
// radius k0, lambda2 = k0^2 / 2.
struct BesselWaveCov final : CovarianceModel::Impl {
  double k0;
  explicit BesselWaveCov(double k) : k0(k) {
    id = "wave";
    lambda0 = ExtendedReal::finite(1.0);
    lambda2 = ExtendedReal::finite(0.5 * k0 * k0);
    lambda4 = ExtendedReal::finite(0.375 * k0 * k0 * k0 * k0);
    tau_scale = 1.0 / k0;
  }
  double r(double t, int order) const override {
    const double a = std::abs(t);
    const double x = k0 * a;
    const double sg = (t < 0 && (order % 2 == 1)) ? -1.0 : 1.0;
    switch (order) {
      case 0: return std::cyl_bessel_j(0, x);
      case 1: return sg * (-k0 * std::cyl_bessel_j(1, x));
      case 2: {
        // J_1'(x) = J_0(x) - J_1(x)/x; series value 1/2 at x = 0.
        const double j1x = (x < 1e-8) ? 0.5 : std::cyl_bessel_j(1, x) / x;
        return -k0 * k0 * (std::cyl_bessel_j(0, x) - j1x);
      }
    }
    throw Error("wave covariance: derivative order > 2 not available");
  }
  double one_minus_r_normalized(double t) const override {
    const double x = k0 * std::abs(t);
    if (x > 0.1) return 1.0 - std::cyl_bessel_j(0, x);
    // 1 - J_0(x) = x^2/4 - x^4/64 + x^6/2304 - ...
    const double q = 0.25 * x * x;
    return q - q * q / 4.0 + q * q * q / 36.0 - q * q * q * q / 576.0;
  }
};

// Even-grid table with natural cubic spline interpolation; derivative orders
// 3 and 4 fall back to differencing the spline, so results are flagged
// approximate.
struct TableCov final : CovarianceModel::Impl {
  std::vector<double> tau, val, m2;  // second derivatives of the spline
  double h;

  TableCov(const std::vector<double>& taus, const std::vector<double>& values) {
    if (taus.size() < 4 || taus.size() != values.size())
      throw Error("user-table: need >= 4 samples on an even grid");
    h = taus[1] - taus[0];
    for (std::size_t i = 1; i < taus.size(); ++i)
      if (std::abs((taus[i] - taus[i - 1]) - h) > 1e-9 * h)
        throw Error("user-table: grid must be even");
    if (std::abs(taus[0]) > 1e-12) throw Error("user-table: grid must start at tau = 0");
    // Mirror to an even function so r'(0) = 0 falls out of the spline.
    const std::size_t n = taus.size();
    tau.resize(2 * n - 1);
    val.resize(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      tau[n - 1 + i] = taus[i];
      val[n - 1 + i] = values[i];
      tau[n - 1 - i] = -taus[i];
      val[n - 1 - i] = values[i];
    }
    build_spline();
    id = "user-table";
    approximate = true;
    lambda0 = ExtendedReal::finite(values[0]);
    lambda2 = ExtendedReal::finite(-spline_eval(0.0, 2));
    lambda4 = ExtendedReal::infinity();
    tau_scale = taus.back();
  }

  void build_spline() {
    const std::size_t n = tau.size();
    m2.assign(n, 0.0);
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double rhs = 6.0 * (val[i + 1] - 2.0 * val[i] + val[i - 1]) / (h * h);
      const double denom = 4.0 - c[i - 1];
      c[i] = 1.0 / denom;
      d[i] = (rhs - d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) m2[i] = d[i] - c[i] * m2[i + 1];
  }

  double spline_eval(double x, int order) const {
    const std::size_t n = tau.size();
    double t = std::min(std::max(x, tau.front()), tau.back());
    std::size_t i = std::min(static_cast<std::size_t>((t - tau.front()) / h), n - 2);
    const double a = (tau[i + 1] - t) / h, b = (t - tau[i]) / h;
    switch (order) {
      case 0:
        return a * val[i] + b * val[i + 1] +
               ((a * a * a - a) * m2[i] + (b * b * b - b) * m2[i + 1]) * h * h / 6.0;
      case 1:
        return (val[i + 1] - val[i]) / h +
               (-(3.0 * a * a - 1.0) * m2[i] + (3.0 * b * b - 1.0) * m2[i + 1]) * h / 6.0;
      case 2:
        return a * m2[i] + b * m2[i + 1];
    }
    throw Error("bad order");
  }

  double r(double t, int order) const override {
    if (order <= 2) return spline_eval(t, order);
    // Central difference of the spline's second derivative.
    const double dh = 0.5 * h;
    if (order == 3) return (spline_eval(t + dh, 2) - spline_eval(t - dh, 2)) / (2.0 * dh);
    return (spline_eval(t + dh, 2) - 2.0 * spline_eval(t, 2) + spline_eval(t - dh, 2)) / (dh * dh);
  }
};

}  // namespace detail

inline CovarianceModel CovarianceModel::gaussian(double sigma) {
  return CovarianceModel(std::make_shared<detail::GaussianCov>(sigma));
}
inline CovarianceModel CovarianceModel::sinc() {
  return CovarianceModel(std::make_shared<detail::SincCov>());
}
inline CovarianceModel CovarianceModel::cosine_plus_noise(double weight, double freq, double sigma) {
  return CovarianceModel(std::make_shared<detail::CosineNoiseCov>(weight, freq, sigma));
}
inline CovarianceModel CovarianceModel::powered_exponential(double alpha) {
  return CovarianceModel(std::make_shared<detail::PoweredExpCov>(alpha));
}
inline CovarianceModel CovarianceModel::log_divergent(double lambda2, double c) {
  return CovarianceModel(std::make_shared<detail::LogDivergentCov>(lambda2, c));
}
inline CovarianceModel CovarianceModel::bessel_wave(double k0) {
  return CovarianceModel(std::make_shared<detail::BesselWaveCov>(k0));
}
inline CovarianceModel CovarianceModel::from_table(const std::vector<double>& taus,
                                                   const std::vector<double>& values) {
  return CovarianceModel(std::make_shared<detail::TableCov>(taus, values));
}

// lambda_p for p in {0,2,4}. Declared values are cross-checked against a
// difference quotient built from the cancellation-free 1 - r; a disagreement
// means the family's stated moments and its r() drifted apart.
inline ExtendedReal spectral_moment(const CovarianceModel& model, int p) {
  if (p != 0 && p != 2 && p != 4) throw Error("spectral moment order must be 0, 2 or 4");
  if (p == 0) return model.lambda0();
  if (p == 2) {
    if (!model.lambda2().is_finite()) return ExtendedReal::infinity();
    const double declared = model.lambda2().value();
    const double h = model.tau_scale() * 1e-5;
    const double numeric =
        2.0 * model.one_minus_r(h) / (h * h) * model.lambda0().value();
    if (std::abs(numeric - declared) > 1e-3 * std::max(1.0, std::abs(declared)))
      throw Error("moment mismatch");
    return model.lambda2();
  }
  if (!model.lambda4().is_finite()) return ExtendedReal::infinity();
  const double declared = model.lambda4().value();
  const double h = model.tau_scale() * 1e-2;
  // 4th central difference, using the even symmetry r(-h) = r(h).
  const double num4 =
      (2.0 * model(2.0 * h) - 8.0 * model(h) + 6.0 * model(0.0)) / (h * h * h * h);
  if (std::abs(num4 - declared) > 2e-2 * std::max(1.0, std::abs(declared)))
    throw Error("moment mismatch");
  return model.lambda4();
}

}  // namespace kacrice
