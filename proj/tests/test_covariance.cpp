#include <catch2/catch_amalgamated.hpp>

#include "kacrice/covariance.hpp"

using namespace kacrice;

namespace {

// Richardson central differences, an oracle independent of each family's
// analytic derivative code.
double numeric_derivative(const CovarianceModel& m, double tau, int order, double h) {
  auto f = [&](double t) { return m(t); };
  switch (order) {
    case 1: return (f(tau + h) - f(tau - h)) / (2 * h);
    case 2: return (f(tau + h) - 2 * f(tau) + f(tau - h)) / (h * h);
    case 3: return (f(tau + 2 * h) - 2 * f(tau + h) + 2 * f(tau - h) - f(tau - 2 * h)) / (2 * h * h * h);
    case 4:
      return (f(tau + 2 * h) - 4 * f(tau + h) + 6 * f(tau) - 4 * f(tau - h) + f(tau - 2 * h)) /
             (h * h * h * h);
  }
  return f(tau);
}

}  // namespace

TEST_CASE("spectral moments of the named families") {
  const auto g = CovarianceModel::gaussian();
  CHECK(spectral_moment(g, 0).value() == Catch::Approx(1.0));
  CHECK(spectral_moment(g, 2).value() == Catch::Approx(1.0));
  CHECK(spectral_moment(g, 4).value() == Catch::Approx(3.0));

  const auto s = CovarianceModel::sinc();
  CHECK(spectral_moment(s, 2).value() == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(spectral_moment(s, 4).value() == Catch::Approx(1.0 / 5.0).epsilon(1e-12));

  const auto f = CovarianceModel::powered_exponential(0.4);
  CHECK(!spectral_moment(f, 2).is_finite());
  CHECK(spectral_moment(f, 0).value() == Catch::Approx(1.0));

  const auto w = CovarianceModel::bessel_wave(std::sqrt(2.0));
  CHECK(spectral_moment(w, 2).value() == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("analytic derivatives match difference quotients") {
  struct Case { CovarianceModel m; int max_order; };
  const Case cases[] = {
      {CovarianceModel::gaussian(), 4},
      {CovarianceModel::sinc(), 4},
      {CovarianceModel::cosine_plus_noise(0.4, 2.0, 1.0), 4},
      {CovarianceModel::powered_exponential(0.4), 2},
      {CovarianceModel::bessel_wave(3.0), 2},
  };
  for (const auto& c : cases) {
    for (double tau : {0.17, 0.43, 0.9}) {
      for (int ord = 1; ord <= c.max_order; ++ord) {
        const double h = (ord <= 2) ? 1e-5 : 1e-3;
        const double num = numeric_derivative(c.m, tau, ord, h);
        CHECK(c.m(tau, ord) == Catch::Approx(num).margin(1e-4 * std::max(1.0, std::abs(num))));
      }
    }
  }
}

TEST_CASE("sinc series and direct branches agree at the switch point") {
  const auto s = CovarianceModel::sinc();
  for (int ord = 0; ord <= 4; ++ord) {
    const double lo = s(0.499999, ord);
    const double hi = s(0.500001, ord);
    CHECK(lo == Catch::Approx(hi).margin(1e-9));
  }
}

TEST_CASE("one_minus_r is cancellation free") {
  const auto g = CovarianceModel::gaussian();
  // 1 - exp(-tau^2/2) ~ tau^2/2 at tau = 1e-8, far below float cancellation.
  CHECK(g.one_minus_r(1e-8) == Catch::Approx(0.5e-16).epsilon(1e-10));
  const auto s = CovarianceModel::sinc();
  CHECK(s.one_minus_r(1e-8) == Catch::Approx(1e-16 / 6.0).epsilon(1e-10));
  const auto f = CovarianceModel::powered_exponential(0.4);
  CHECK(f.one_minus_r(1e-10) == Catch::Approx(std::pow(1e-10, 0.8)).epsilon(1e-10));
}

TEST_CASE("evenness and normalization invariants") {
  for (const auto& m : {CovarianceModel::gaussian(), CovarianceModel::sinc(),
                        CovarianceModel::cosine_plus_noise(0.5, 3.0, 0.7)}) {
    CHECK(m(0.0) == Catch::Approx(m.lambda0().value()));
    for (double tau : {0.3, 1.7, 4.0}) {
      CHECK(m(tau) == Catch::Approx(m(-tau)).margin(1e-14));
      CHECK(m(tau, 1) == Catch::Approx(-m(-tau, 1)).margin(1e-14));
      CHECK(std::abs(m(tau)) <= m(0.0) + 1e-12);
    }
  }
}

TEST_CASE("purely discrete flag") {
  CHECK(CovarianceModel::cosine_plus_noise(1.0, 2.0, 1.0).purely_discrete());
  CHECK(!CovarianceModel::cosine_plus_noise(0.9, 2.0, 1.0).purely_discrete());
}

TEST_CASE("table covariance reproduces a smooth model approximately") {
  const auto g = CovarianceModel::gaussian();
  std::vector<double> taus, vals;
  for (int i = 0; i <= 400; ++i) {
    taus.push_back(i * 0.01);
    vals.push_back(g(taus.back()));
  }
  const auto t = CovarianceModel::from_table(taus, vals);
  CHECK(t.approximate());
  CHECK(t.lambda2().value() == Catch::Approx(1.0).margin(2e-3));
  for (double tau : {0.105, 0.5, 1.77}) {
    CHECK(t(tau) == Catch::Approx(g(tau)).margin(1e-6));
    CHECK(t(tau, 1) == Catch::Approx(g(tau, 1)).margin(1e-4));
    CHECK(t(tau, 2) == Catch::Approx(g(tau, 2)).margin(1e-3));
  }
}

TEST_CASE("declared moment inconsistent with r is refused") {
  struct Broken final : CovarianceModel::Impl {
    Broken() {
      id = "broken";
      lambda0 = ExtendedReal::finite(1.0);
      lambda2 = ExtendedReal::finite(2.0);  // r'' (0) actually gives 1
    }
    double r(double t, int) const override { return std::exp(-0.5 * t * t); }
  };
  const CovarianceModel broken(std::make_shared<Broken>());
  CHECK_THROWS_WITH(spectral_moment(broken, 2), "moment mismatch");
}
