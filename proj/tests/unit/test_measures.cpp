#include <cmath>
#include <numbers>

#include "doctest.h"
#include "selfsim/measures.hpp"

using namespace selfsim;
using doctest::Approx;

namespace {

// Gamma(1-g) Gamma(l+1) / Gamma(l+1-g) - 1, the barrier exponent in closed form.
double barrier_psi(double g, double l) {
  return std::exp(std::lgamma(1 - g) + std::lgamma(l + 1) - std::lgamma(l + 1 - g)) - 1.0;
}

std::vector<FiniteMeasure> zoo() {
  return {FiniteMeasure::atom(1.0, 0.0),
          FiniteMeasure::atom(1.0, 1.0),
          FiniteMeasure::barrier(0.5),
          FiniteMeasure::barrier(0.3),
          FiniteMeasure::beta_density(1.5, 1.0),
          FiniteMeasure::lebesgue(0.5) + FiniteMeasure::atom(0.25, 0.0) + FiniteMeasure::atom(0.25, 1.0),
          FiniteMeasure::atom(0.7, 0.5) + FiniteMeasure::beta_density(2.0, 3.0, 2.0)};
}

}  // namespace

TEST_CASE("laplace exponent of atoms") {
  CHECK(laplace_exponent(FiniteMeasure::atom(1.0, 0.0), 5.0) == 1.0);
  CHECK(laplace_exponent(FiniteMeasure::atom(1.0, 1.0), 5.0) == 5.0);
  CHECK(laplace_exponent(FiniteMeasure::atom(1.0, 0.5), 2.0) == Approx(1.5));
}

TEST_CASE("laplace exponent at zero is the atom at 0") {
  const FiniteMeasure mu = FiniteMeasure::atom(0.3, 0.0) + FiniteMeasure::barrier(0.5);
  CHECK(laplace_exponent(mu, 0.0) == 0.3);
}

TEST_CASE("barrier laplace exponent") {
  const FiniteMeasure mu = FiniteMeasure::barrier(0.5);
  CHECK(laplace_exponent(mu, 1.0) == Approx(1.0).epsilon(1e-9));
  CHECK(laplace_exponent(mu, 0.5) == Approx(std::numbers::pi / 2 - 1).epsilon(1e-9));
  for (double g : {0.2, 0.5, 0.8}) {
    const FiniteMeasure m = FiniteMeasure::barrier(g);
    for (double l : {0.25, 1.0, 3.0, 10.0}) CHECK(laplace_exponent(m, l) == Approx(barrier_psi(g, l)).epsilon(1e-8));
  }
}

TEST_CASE("integrate against measures") {
  CHECK(integrate(FiniteMeasure::atom(1.0, 0.0), [](double) { return 1.0; }).value == 1.0);
  CHECK(integrate(FiniteMeasure::lebesgue(), [](double x) { return x; }).value == Approx(0.5).epsilon(1e-12));
  // antiderivative of g (1-x)^-g is -(1-x)^(1-g) g/(1-g)
  CHECK(integrate(FiniteMeasure::barrier(0.5), [](double) { return 1.0; }).value == Approx(1.0).epsilon(1e-9));
  CHECK(FiniteMeasure::barrier(0.25).total_mass() == Approx(0.25 / 0.75).epsilon(1e-12));
}

TEST_CASE("measure validation") {
  CHECK_THROWS_AS(FiniteMeasure{}.validate(), DomainError);
  CHECK_THROWS_AS(FiniteMeasure::atom(-1.0, 0.5).validate(), DomainError);
  CHECK_THROWS(FiniteMeasure::atom(1.0, 1.5).validate());
  CHECK_NOTHROW(FiniteMeasure::barrier(0.5).validate());
}

TEST_CASE("binomial moments match quadrature") {
  const FiniteMeasure mu = FiniteMeasure::beta_density(1.5, 1.0);
  for (double j : {0.0, 3.0, 40.0})
    for (double m : {0.0, 2.0, 17.0}) {
      const double closed = mu.binomial_moment(0.0, j, m);
      const double quad = mu.binomial_moment(0.0, j, m, {}, true);
      CHECK(closed == Approx(quad).epsilon(1e-9));
    }
}

TEST_CASE("levy triple of atoms") {
  const LevyTriple k = levy_triple(FiniteMeasure::atom(1.0, 0.0));
  CHECK(k.killing == 1.0);
  CHECK(k.drift == 0.0);
  CHECK(k.levy.empty());
  const LevyTriple d = levy_triple(FiniteMeasure::atom(1.0, 1.0));
  CHECK(d.killing == 0.0);
  CHECK(d.drift == 1.0);
  CHECK(d.levy.empty());
}

TEST_CASE("levy density of the barrier measure") {
  const double g = 0.5;
  const LevyTriple t = levy_triple(FiniteMeasure::barrier(g));
  for (double y : {0.01, 0.3, 1.0, 4.0}) {
    const double expected = g * std::exp(-y) * std::pow(1 - std::exp(-y), -g - 1);
    CHECK(t.levy.density(y) == Approx(expected).epsilon(1e-12));
  }
  // tail: int_y^inf omega = (1 - e^-y)^-g - 1
  for (double y : {0.05, 1.0, 3.0}) CHECK(t.levy.tail(y) == Approx(std::pow(1 - std::exp(-y), -g) - 1).epsilon(1e-8));
  // int (y ^ 1) omega finite
  const double small = t.levy.integrate_y([](double y) { return y; }, 0.0, 1.0, 1.0);
  CHECK(std::isfinite(small));
  CHECK(small > 0.0);
}

TEST_CASE("levy atom") {
  const LevyMeasure w = LevyMeasure::atom(2.0, std::log(2.0));
  const auto atoms = w.atoms();
  REQUIRE(atoms.size() == 1);
  CHECK(atoms[0].x == Approx(std::log(2.0)));
  CHECK(atoms[0].mass == Approx(2.0));
  LevyTriple t{0.0, 0.0, w};
  CHECK(laplace_exponent(t, 1.0) == Approx(2.0 * 0.5).epsilon(1e-12));
}

TEST_CASE("triple round trip") {
  for (const FiniteMeasure& mu : zoo()) {
    const LevyTriple t = levy_triple(mu);
    for (double l : {0.1, 0.5, 1.0, 2.0, 5.0})
      CHECK(laplace_exponent(t, l) == Approx(laplace_exponent(mu, l)).epsilon(1e-7));
  }
}

TEST_CASE("laplace exponent is non-negative, increasing and concave") {
  for (const FiniteMeasure& mu : zoo()) {
    const double h = 0.25;
    std::vector<double> v;
    for (double l = 0.0; l <= 6.0 + 1e-12; l += h) v.push_back(laplace_exponent(mu, l));
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      CHECK(v[i] >= 0.0);
      CHECK(v[i + 1] >= v[i] - 1e-9);
    }
    for (std::size_t i = 1; i + 1 < v.size(); ++i) CHECK(v[i + 1] - 2 * v[i] + v[i - 1] <= 1e-8);
  }
}

TEST_CASE("laplace exponent scales linearly") {
  const FiniteMeasure atoms = FiniteMeasure::atom(0.4, 0.0) + FiniteMeasure::atom(0.6, 0.3);
  CHECK(laplace_exponent(atoms.scaled(3.0), 2.0) == Approx(3.0 * laplace_exponent(atoms, 2.0)).epsilon(1e-15));
  const FiniteMeasure dens = FiniteMeasure::barrier(0.5);
  CHECK(laplace_exponent(dens.scaled(2.5), 1.7) == Approx(2.5 * laplace_exponent(dens, 1.7)).epsilon(1e-9));
}
