#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "selfsim/limit_process.hpp"
#include "selfsim/stats.hpp"

using namespace selfsim;
using doctest::Approx;

namespace {

LevyTriple killing_only() { return {1.0, 0.0, {}}; }
LevyTriple drift_only() { return {0.0, 1.0, {}}; }

}  // namespace

TEST_CASE("pure killing path") {
  for (std::size_t i = 0; i < 20; ++i) {
    Stream rng(1, i);
    const SubordinatorPath p = sample_subordinator(killing_only(), 0.01, 100.0, rng);
    CHECK(p.jump_times.empty());
    CHECK(p.drift == 0.0);
    const double e = p.killing_time;
    CHECK(p.xi(e * 0.999) == 0.0);
    CHECK(std::isinf(p.xi(e)));
    const LimitSample s = lamperti(p, 0.7, 1.0);
    CHECK(s.killed);
    CHECK(s.I == Approx(e).epsilon(1e-14));
    CHECK(s.sigma == Approx(e).epsilon(1e-14));
    CHECK(s.Y(e * 0.999) == 1.0);
    CHECK(s.Y(e * 1.001) == 0.0);
  }
}

TEST_CASE("killing times are exponential") {
  std::vector<double> e;
  for (std::size_t i = 0; i < 20000; ++i) {
    Stream rng(2, i);
    e.push_back(sample_subordinator(killing_only(), 0.01, 1e6, rng).killing_time);
  }
  CHECK(empirical_moment(e, 1.0).within(1.0));
  CHECK(empirical_moment(e, 2.0).within(2.0));
}

TEST_CASE("pure drift path and its Lamperti image") {
  Stream rng(3, 0);
  const SubordinatorPath p = sample_subordinator(drift_only(), 0.01, 50.0, rng);
  CHECK_FALSE(p.killed());
  for (double t : {0.0, 0.5, 3.0, 49.0}) CHECK(p.xi(t) == Approx(t).epsilon(1e-15));
  const LimitSample s = lamperti(p, 1.0, 1.0);
  CHECK(s.I == Approx(1.0).epsilon(1e-12));
  CHECK(s.sigma == Approx(s.I).epsilon(1e-12));
  CHECK(s.horizon_ok);
  for (double t : {0.0, 0.1, 0.5, 0.9, 0.999}) CHECK(s.Y(t) == Approx(1.0 - t).epsilon(1e-9));
  // gamma = 1/2: Y(t) = (1 - t/2)^2 on [0, 2)
  const LimitSample h = lamperti(p, 0.5, 0.5);
  CHECK(h.I == Approx(2.0).epsilon(1e-9));
  for (double t : {0.2, 1.0, 1.9}) CHECK(h.Y(t) == Approx((1 - t / 2) * (1 - t / 2)).epsilon(1e-9));
}

TEST_CASE("compound Poisson jump counts") {
  const double rho = 2.0, y0 = 0.7, T = 3.0;
  const LevyTriple t{0.0, 0.0, LevyMeasure::atom(rho, y0)};
  std::vector<double> xi, count;
  for (std::size_t i = 0; i < 20000; ++i) {
    Stream rng(4, i);
    const SubordinatorPath p = sample_subordinator(t, 0.01, T, rng);
    xi.push_back(p.xi(T));
    count.push_back(double(p.jump_times.size()));
    for (double s : p.jump_sizes) CHECK(s == Approx(y0));
  }
  CHECK(empirical_moment(xi).within(rho * y0 * T));
  CHECK(empirical_moment(count).within(rho * T));
  CHECK(empirical_moment(count, 2.0).within(rho * T + rho * T * rho * T));
}

TEST_CASE("cutoff and drift compensation for the barrier triple") {
  const LevyTriple t = levy_triple(FiniteMeasure::barrier(0.5));
  const double horizon = 10.0;
  const SubordinatorSampler s(t, horizon);
  CHECK(s.neglected_variance() <= 1e-6 / horizon * (1 + 1e-9));
  const double eps = s.eps_cut();
  const double small_mean = t.levy.integrate_y([](double y) { return y; }, 0.0, eps, 1.0);
  CHECK(s.drift() == Approx(t.drift + small_mean).epsilon(1e-9));
  CHECK(s.jump_rate() == Approx(t.levy.tail(eps)).epsilon(1e-9));
  // the inverse tail table inverts the tail
  for (double u : {0.999, 0.9, 0.5, 0.1, 1e-3, 1e-6}) {
    const double y = s.invert_density_tail(u);
    CHECK(s.density_tail(y) == Approx(u * s.density_tail(eps)).epsilon(1e-6));
  }
}

TEST_CASE("mean of xi_T for the barrier triple") {
  // E xi_T = T (d + int y omega(dy)) = T psi'(0)
  const LevyTriple t = levy_triple(FiniteMeasure::barrier(0.5));
  const double mean_rate = t.levy.integrate_y([](double y) { return y; }, 0.0, INFINITY, 1.0);
  const SubordinatorSampler s(t, 2.0);
  std::vector<double> xi;
  for (std::size_t i = 0; i < 20000; ++i) {
    Stream rng(5, i);
    xi.push_back(s.sample(rng).xi(2.0));
  }
  CHECK(empirical_moment(xi).within(2.0 * mean_rate));
}

TEST_CASE("sigma equals I on every sampled path") {
  const FiniteMeasure mu = FiniteMeasure::barrier(0.5) + FiniteMeasure::atom(0.3, 0.0) + FiniteMeasure::atom(0.2, 1.0);
  const LevyTriple t = levy_triple(mu);
  const double gamma = 0.5;
  const SubordinatorSampler s(t, 5.0);
  const double psi = laplace_exponent(mu, gamma);
  for (std::size_t i = 0; i < 500; ++i) {
    Stream rng(6, i);
    const LimitSample l = sample_limit(s, gamma, psi, rng);
    CHECK(l.sigma == Approx(l.I).epsilon(1e-12));
    // Y is non-increasing from 1
    CHECK(l.Y(0.0) == 1.0);
    double prev = 1.0;
    for (double u = 0.0; u < l.sigma * 1.1; u += l.sigma / 50) {
      const double y = l.Y(u);
      CHECK(y <= prev);
      prev = y;
    }
  }
}

TEST_CASE("Lamperti clock against a direct integral") {
  const LevyTriple t{0.0, 0.3, LevyMeasure::atom(1.5, 0.4)};
  Stream rng(7, 0);
  const SubordinatorPath p = sample_subordinator(t, 0.01, 30.0, rng);
  const double gamma = 0.8;
  const LimitSample l = lamperti(p, gamma);
  // midpoint rule on int_0^T exp(-gamma xi_r) dr
  const std::size_t m = 3'000'000;
  double I = 0.0;
  for (std::size_t i = 0; i < m; ++i) I += std::exp(-gamma * p.xi((i + 0.5) * 30.0 / m)) * 30.0 / m;
  CHECK(l.I == Approx(I).epsilon(1e-5));
  // tau(t) inverts the clock: int_0^tau(t) exp(-gamma xi) = t
  for (double c : {0.1, 0.5, 1.0}) {
    const double target = c * l.I;
    const double r = l.tau(target);
    double acc = 0.0;
    const std::size_t k = 200000;
    for (std::size_t i = 0; i < k; ++i) acc += std::exp(-gamma * p.xi((i + 0.5) * r / k)) * r / k;
    CHECK(acc == Approx(target).epsilon(1e-4));
    CHECK(l.Y(target) == Approx(std::exp(-p.xi(r))).epsilon(1e-9));
  }
}

TEST_CASE("analytic moments") {
  const auto k = analytic_moments([](double) { return 1.0; }, 0.5, 4);
  CHECK(k[0] == 1.0);
  CHECK(k[1] == Approx(1.0));
  CHECK(k[2] == Approx(2.0));
  CHECK(k[4] == Approx(24.0));
  const auto b = analytic_moments(FiniteMeasure::barrier(0.5), 0.5, 2);
  const double psi_half = std::exp(std::lgamma(0.5) + std::lgamma(1.5) - std::lgamma(1.0)) - 1.0;
  CHECK(psi_half == Approx(std::numbers::pi / 2 - 1).epsilon(1e-14));
  CHECK(b[1] == Approx(1.0 / psi_half).epsilon(1e-9));
  CHECK(b[1] == Approx(1.7519383938).epsilon(1e-9));
  CHECK(b[2] == Approx(2.0 / psi_half).epsilon(1e-9));
  CHECK(b[2] == Approx(3.5038767876).epsilon(1e-9));
  CHECK_THROWS(analytic_moments([](double) { return 0.0; }, 1.0, 2));
}

TEST_CASE("Monte Carlo moments of I for the barrier exponent") {
  const FiniteMeasure mu = FiniteMeasure::barrier(0.5);
  const double gamma = 0.5;
  const SubordinatorSampler s(levy_triple(mu), 10.0);
  const double psi = laplace_exponent(mu, gamma);
  std::vector<double> I;
  for (std::size_t i = 0; i < 5000; ++i) {
    Stream rng(8, i);
    I.push_back(sample_limit(s, gamma, psi, rng).I);
  }
  const auto m = analytic_moments(mu, gamma, 2);
  CHECK(empirical_moment(I, 1.0).within(m[1]));
  CHECK(empirical_moment(I, 2.0).within(m[2]));
}

TEST_CASE("marginal law of exp(-xi)") {
  const FiniteMeasure mu = FiniteMeasure::barrier(0.5) + FiniteMeasure::atom(0.5, 0.0);
  const LevyTriple t = levy_triple(mu);
  const SubordinatorSampler s(t, 1.0);
  for (double lambda : {0.5, 1.0, 2.0}) {
    std::vector<double> z;
    for (std::size_t i = 0; i < 10000; ++i) {
      Stream rng(9, i);
      const SubordinatorPath p = s.sample(rng);
      z.push_back(p.killed() ? 0.0 : std::exp(-lambda * p.xi(1.0)));
    }
    CHECK(empirical_moment(z).within(std::exp(-laplace_exponent(mu, lambda))));
  }
}

TEST_CASE("extension continues the same law") {
  const LevyTriple t = levy_triple(FiniteMeasure::barrier(0.5));
  const SubordinatorSampler s(t, 1.0);
  Stream rng(10, 0);
  SubordinatorPath p = s.sample(rng);
  const double before = p.xi(1.0);
  s.extend(p, 3.0, rng);
  CHECK(p.horizon == 3.0);
  CHECK(p.xi(1.0) == before);
  CHECK(p.xi(3.0) >= before);
  for (std::size_t i = 1; i < p.jump_times.size(); ++i) CHECK(p.jump_times[i] >= p.jump_times[i - 1]);
}

TEST_CASE("balls in gaps for a geometric range") {
  // range points 1 - 2^-j, so gap j is [1 - 2^-(j-1), 1 - 2^-j)
  const LevyTriple t{0.0, 0.0, LevyMeasure::atom(1.0, std::log(2.0))};
  const SubordinatorSampler s(t, 5.0);
  std::vector<double> together;
  for (std::size_t i = 0; i < 20000; ++i) {
    Stream rng(11, i);
    const GapComposition one = balls_in_gaps(s, 1, rng);
    CHECK(one.composition.parts == std::vector<std::size_t>{1});
    const GapComposition two = balls_in_gaps(s, 2, rng);
    CHECK_FALSE(two.insufficient);
    std::size_t total = 0;
    for (auto c : two.composition.parts) total += c;
    CHECK(total == 2);
    together.push_back(two.composition.length() == 1 ? 1.0 : 0.0);
  }
  CHECK(empirical_moment(together).within(1.0 / 3.0));
}

TEST_CASE("balls in gaps on a fixed path") {
  SubordinatorPath p;
  p.horizon = 10.0;
  p.jump_times = {1.0, 2.0};
  p.jump_sizes = {std::log(2.0), std::log(2.0)};
  p.jump_cumsum = {std::log(2.0), std::log(4.0)};
  // range {0, 1/2, 3/4} up to the horizon; gaps [0, 1/2) and [1/2, 3/4)
  const std::vector<double> u{0.1, 0.6, 0.2, 0.7, 0.45};
  const GapComposition g = balls_in_gaps(p, u);
  CHECK(g.composition.parts == std::vector<std::size_t>{3, 2});
  CHECK_FALSE(g.insufficient);
  // balls past the reach of the path cannot be placed
  const std::vector<double> v{0.3, 0.8, 0.85};
  const GapComposition h = balls_in_gaps(p, v);
  CHECK(h.composition.parts == std::vector<std::size_t>{1, 1, 1});
  CHECK(h.insufficient);
  CHECK(h.uncovered_balls == 2);
}

TEST_CASE("balls in gaps needs an unkilled path") {
  const SubordinatorSampler s(killing_only(), 1.0);
  Stream rng(12, 0);
  CHECK_THROWS_AS(balls_in_gaps(s, 3, rng), PreconditionError);
}
