#include <catch2/catch_amalgamated.hpp>

#include "kacrice/quadrature.hpp"

using namespace kacrice;

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  const QuadRule r = gauss_legendre(8);
  double s0 = 0.0, s2 = 0.0, s14 = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    s0 += r.weights[i];
    s2 += r.weights[i] * r.nodes[i] * r.nodes[i];
    s14 += r.weights[i] * std::pow(r.nodes[i], 14);
  }
  CHECK(s0 == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(s2 == Catch::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(s14 == Catch::Approx(2.0 / 15.0).epsilon(1e-13));
}

TEST_CASE("probabilists' Gauss-Hermite matches normal moments") {
  const QuadRule r = gauss_hermite_prob(24);
  double s0 = 0.0, s2 = 0.0, s4 = 0.0, s6 = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    s0 += r.weights[i];
    s2 += r.weights[i] * sq(r.nodes[i]);
    s4 += r.weights[i] * std::pow(r.nodes[i], 4);
    s6 += r.weights[i] * std::pow(r.nodes[i], 6);
  }
  CHECK(s0 == Catch::Approx(1.0).epsilon(1e-13));
  CHECK(s2 == Catch::Approx(1.0).epsilon(1e-13));
  CHECK(s4 == Catch::Approx(3.0).epsilon(1e-13));
  CHECK(s6 == Catch::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("adaptive integration localizes kinks") {
  const double v = integrate_adaptive([](double x) { return std::abs(x - 0.3); }, -1.0, 1.0, 1e-12);
  // int |x-0.3| over [-1,1] = (1.3^2 + 0.7^2)/2
  CHECK(v == Catch::Approx(0.5 * (1.69 + 0.49)).epsilon(1e-11));
}

TEST_CASE("gauss_quadrature_2d normalization and moments") {
  CHECK(gauss_quadrature_2d([](double, double) { return 1.0; }, 0.3) ==
        Catch::Approx(1.0).margin(1e-10));
  CHECK(gauss_quadrature_2d([](double z, double w) { return z * w; }, 0.4) ==
        Catch::Approx(0.4).margin(1e-10));
  CHECK(gauss_quadrature_2d([](double z, double w) { return std::abs(z) * std::abs(w); }, 0.0) ==
        Catch::Approx(2.0 / M_PI).margin(1e-8));
}

TEST_CASE("gauss_quadrature_2d rejects degenerate correlation") {
  CHECK_THROWS_AS(gauss_quadrature_2d([](double, double) { return 1.0; }, 1.0), Error);
  CHECK_THROWS_AS(gauss_quadrature_2d([](double, double) { return 1.0; }, -1.2), Error);
  CHECK_THROWS_AS(gauss_quadrature_2d([](double, double) { return 1.0; }, 0.0, 4), Error);
}

TEST_CASE("gaussian expectation of Hermite-orthogonal products") {
  // E[Z^2 - 1] = 0 and E[(Z^2-1)^2] = 2.
  CHECK(gaussian_expectation_1d([](double z) { return z * z - 1.0; }) ==
        Catch::Approx(0.0).margin(1e-10));
  CHECK(gaussian_expectation_1d([](double z) { return sq(z * z - 1.0); }) ==
        Catch::Approx(2.0).margin(1e-9));
}
