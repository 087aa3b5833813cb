#include <cmath>
#include <vector>

#include "doctest.h"
#include "selfsim/numeric.hpp"
#include "selfsim/random.hpp"
#include "selfsim/time_change.hpp"

using namespace selfsim;
using doctest::Approx;

namespace {

StepFunction random_staircase(Stream& rng, std::size_t levels) {
  StepFunction f{{0.0}, {1.0}};
  double v = 1.0, t = 0.0;
  for (std::size_t i = 0; i < levels; ++i) {
    t += 0.05 + rng.exponential();
    v *= rng.uniform();
    f.breaks.push_back(t);
    f.values.push_back(v);
  }
  f.breaks.push_back(t + 0.05 + rng.exponential());
  f.values.push_back(0.0);
  return f;
}

}  // namespace

TEST_CASE("step function evaluation and validation") {
  const StepFunction f{{0.0, 1.0, 2.5}, {1.0, 0.4, 0.0}};
  CHECK_NOTHROW(f.validate());
  CHECK(f(0.0) == 1.0);
  CHECK(f(0.999) == 1.0);
  CHECK(f(1.0) == 0.4);
  CHECK(f(2.5) == 0.0);
  CHECK(f(100.0) == 0.0);
  CHECK(f.zero_time() == 2.5);
  CHECK(std::isinf(StepFunction{{0.0}, {0.3}}.zero_time()));
  CHECK_THROWS_AS((StepFunction{{0.0, 1.0}, {0.5, 0.7}}.validate()), DomainError);
  CHECK_THROWS_AS((StepFunction{{0.5, 1.0}, {0.5, 0.2}}.validate()), DomainError);
  CHECK_THROWS_AS((StepFunction{{0.0, 1.0, 1.0}, {1.0, 0.5, 0.2}}.validate()), DomainError);
  CHECK_THROWS_AS((StepFunction{{0.0}, {1.5}}.validate()), DomainError);
}

TEST_CASE("unit level is left alone") {
  for (double gamma : {0.3, 1.0, 2.0}) {
    const TimeChange tc = time_change(StepFunction{{0.0, 1.0}, {1.0, 0.0}}, gamma);
    CHECK(tc.sigma_f() == 1.0);
    CHECK(tc.sigma_g() == Approx(1.0));
    for (double t : {0.0, 0.3, 0.99}) {
      CHECK(tc.tau(t) == Approx(t));
      CHECK(tc.tau_inv(t) == Approx(t));
    }
    CHECK(std::isinf(tc.tau(1.0)));
    CHECK(tc.g()(0.5) == 1.0);
    CHECK(tc.g()(1.0) == 0.0);
  }
}

TEST_CASE("two-level staircase against brute-force inversion") {
  const StepFunction f{{0.0, 1.0, 2.0}, {1.0, 0.25, 0.0}};
  const double gamma = 0.5;
  const TimeChange tc = time_change(f, gamma);
  const double d = 1e-4;
  // tau_f by left Riemann sums, inverted by scanning
  std::vector<double> tau{0.0};
  for (double r = 0.0; r < 2.0 - d / 2; r += d) tau.push_back(tau.back() + d * std::pow(f(r), -gamma));
  auto brute_inv = [&](double s) {
    for (std::size_t i = 0; i < tau.size(); ++i)
      if (tau[i] > s) return (i == 0 ? 0.0 : i - 1) * d;
    return 2.0;
  };
  double worst = 0.0;
  for (double s = 0.0; s < 2.9; s += 0.003) worst = std::max(worst, std::abs(tc.tau_inv(s) - brute_inv(s)));
  CHECK(worst <= 2 * d);
  CHECK(tc.tau(1.5) == Approx(1.0 + 0.5 * 2.0));
  CHECK(tc.sigma_g() == Approx(3.0));
  CHECK(tc.g()(2.0) == 0.25);
  CHECK(tc.g()(0.5) == 1.0);
  CHECK(tc.g()(3.0) == 0.0);
}

TEST_CASE("round trip and sigma identity on random staircases") {
  for (std::size_t trial = 0; trial < 200; ++trial) {
    Stream rng(13, trial);
    const StepFunction f = random_staircase(rng, 1 + trial % 6);
    const double gamma = 0.2 + 1.5 * rng.uniform();
    const TimeChange tc = time_change(f, gamma);
    CHECK(tc.sigma_f() == f.zero_time());
    CHECK(tc.integral_g_gamma() == Approx(tc.sigma_f()).epsilon(1e-12));
    const double end = tc.sigma_g();
    for (int k = 0; k < 20; ++k) {
      const double t = end * rng.uniform();
      CHECK(tc.tau(tc.tau_inv(t)) == Approx(t).epsilon(1e-12));
      CHECK(tc.g()(t) == f(tc.tau_inv(t)));
      // tau_inv(t) = int_0^t g^gamma
      double acc = 0.0;
      const auto& gb = tc.g().breaks;
      for (std::size_t i = 0; i < gb.size() && gb[i] < t; ++i) {
        const double hi = i + 1 < gb.size() ? std::min(gb[i + 1], t) : t;
        acc += std::pow(tc.g().values[i], gamma) * (hi - gb[i]);
      }
      CHECK(tc.tau_inv(t) == Approx(acc).epsilon(1e-12));
    }
  }
}

TEST_CASE("change of variables") {
  // int_0^tau(t) h(g(s)) ds = int_0^t h(f(r)) f(r)^-gamma dr for h(v) = v^2
  const StepFunction f{{0.0, 0.5, 1.25, 2.0}, {1.0, 0.6, 0.2, 0.0}};
  const double gamma = 0.8;
  const TimeChange tc = time_change(f, gamma);
  const double t = 1.7;
  double rhs = 0.0;
  for (std::size_t i = 0; i + 1 < f.breaks.size(); ++i) {
    const double hi = std::min(f.breaks[i + 1], t);
    if (hi <= f.breaks[i]) break;
    rhs += f.values[i] * f.values[i] * std::pow(f.values[i], -gamma) * (hi - f.breaks[i]);
  }
  double lhs = 0.0;
  const double T = tc.tau(t);
  const auto& g = tc.g();
  for (std::size_t i = 0; i < g.breaks.size() && g.breaks[i] < T; ++i) {
    const double hi = i + 1 < g.breaks.size() ? std::min(g.breaks[i + 1], T) : T;
    lhs += g.values[i] * g.values[i] * (hi - g.breaks[i]);
  }
  CHECK(lhs == Approx(rhs).epsilon(1e-12));
}
