#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "selfsim/numeric.hpp"
#include "selfsim/quadrature.hpp"

using namespace selfsim;
using doctest::Approx;

TEST_CASE("bracket values") {
  CHECK(bracket(1.0, 0.37) == Approx(1.0).epsilon(1e-15));
  CHECK(bracket(2.0, 0.5) == Approx(1.5).epsilon(1e-15));
  CHECK(bracket(3.7, 1.0) == 3.7);
  CHECK(bracket(2.5, 0.0) == 1.0);
}

TEST_CASE("bracket is continuous at x = 1") {
  for (double lambda : {0.3, 1.0, 2.0, 7.5}) {
    CHECK(bracket(lambda, 1.0 - 1e-12) == Approx(lambda).epsilon(1e-9));
    CHECK(bracket(lambda, 1.0 - 1e-6) == Approx(lambda).epsilon(1e-5));
  }
}

TEST_CASE("bracket rejects bad arguments") {
  CHECK_THROWS_AS(bracket(0.0, 0.5), DomainError);
  CHECK_THROWS_AS(bracket(-1.0, 0.5), DomainError);
  CHECK_THROWS_AS(bracket(1.0, -0.1), DomainError);
  CHECK_THROWS_AS(bracket(1.0, 1.1), DomainError);
}

TEST_CASE("bracket is monotone in lambda and sandwiched") {
  for (double x = 0.0; x <= 1.0; x += 0.05) {
    double prev = 0.0;
    for (double lambda = 0.1; lambda < 6.0; lambda += 0.1) {
      const double b = bracket(lambda, x);
      CHECK(b >= prev - 1e-14);
      CHECK(b >= std::min(1.0, lambda) - 1e-12);
      CHECK(b <= std::max(1.0, lambda) + 1e-12);
      prev = b;
    }
  }
}

TEST_CASE("compensated summation keeps the small terms") {
  const std::vector<double> xs{1e16, 1.0, -1e16, 1.0};
  CHECK(compensated_sum(xs) == 2.0);
  CompensatedSum s;
  for (int i = 0; i < 10; ++i) s += 0.1;
  CHECK(s.value() == Approx(1.0).epsilon(1e-16));
}

TEST_CASE("log gamma family") {
  for (double x : {0.5, 1.0, 2.5, 10.0, 170.3}) CHECK(log_gamma(x) == Approx(std::lgamma(x)).epsilon(1e-13));
  CHECK(std::exp(log_beta(2.0, 3.0)) == Approx(1.0 / 12.0).epsilon(1e-13));
  CHECK(std::exp(log_binomial(10, 3)) == Approx(120.0).epsilon(1e-12));
  CHECK(std::exp(log_binomial(5, 0)) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("chi-square survival function") {
  // dof 2 is exponential with mean 2
  for (double x : {0.1, 1.0, 5.0, 20.0}) CHECK(chi_square_sf(x, 2.0) == Approx(std::exp(-x / 2)).epsilon(1e-10));
  // dof 1: P(|N| > sqrt x)
  CHECK(chi_square_sf(3.841458820694124, 1.0) == Approx(0.05).epsilon(1e-8));
  CHECK(chi_square_sf(0.0, 3.0) == 1.0);
}

TEST_CASE("adaptive quadrature") {
  const QuadResult r = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  CHECK(r.converged);
  CHECK(r.value == Approx(2.0).epsilon(1e-12));
}

TEST_CASE("endpoint power substitution") {
  // int_0^1 x^-1/2 (1-x)^-1/2 dx = pi
  const QuadResult r = integrate_endpoint_powers([](double) { return 1.0; }, 0.0, 1.0, -0.5, -0.5);
  CHECK(r.value == Approx(std::numbers::pi).epsilon(1e-10));
  // int_0^1 cos(x) (1-x)^-0.9 dx against a fine midpoint sum of the substituted form
  const double v = integrate_or_throw([](double x) { return std::cos(x); }, 0.0, 1.0, 0.0, -0.9);
  double ref = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double w = (i + 0.5) / m;  // w = (1-x)^0.1, dx = 10 w^9 dw, (1-x)^-0.9 = w^-9
    ref += 10.0 * std::cos(1.0 - std::pow(w, 10.0)) / m;
  }
  CHECK(v == Approx(ref).epsilon(1e-8));
}
