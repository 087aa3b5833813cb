#include <cmath>
#include <vector>

#include "doctest.h"
#include "selfsim/random.hpp"
#include "selfsim/stats.hpp"

using namespace selfsim;
using doctest::Approx;

TEST_CASE("empirical moment examples") {
  const std::vector<double> c(5, 3.25);
  const auto e = empirical_moment(c);
  CHECK(e.value == 3.25);
  CHECK(e.se == 0.0);
  CHECK(e.degenerate);

  const std::vector<double> two{0.0, 2.0};
  const auto f = empirical_moment(two);
  CHECK(f.value == Approx(1.0));
  CHECK(f.se == Approx(1.0));

  const std::vector<double> ones(4, 1.0);
  const auto g = empirical_moment(ones, 7.0);
  CHECK(g.value == 1.0);
  CHECK(g.se == 0.0);
}

TEST_CASE("empirical moment needs two samples") {
  const std::vector<double> one{1.0};
  CHECK_THROWS(empirical_moment(one));
}

TEST_CASE("jackknife SE of the mean is the classical SE") {
  Stream rng(7, 0);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = rng.exponential();
  double m = 0.0;
  for (double x : xs) m += x;
  m /= xs.size();
  double s2 = 0.0;
  for (double x : xs) s2 += (x - m) * (x - m);
  s2 /= xs.size() - 1;
  const auto e = empirical_moment(xs);
  CHECK(e.value == Approx(m).epsilon(1e-12));
  CHECK(e.se == Approx(std::sqrt(s2 / xs.size())).epsilon(1e-9));
  CHECK(e.within(m));
}

TEST_CASE("SE halves when the sample quadruples") {
  Stream rng(11, 3);
  std::vector<double> xs(40000);
  for (auto& x : xs) x = rng.uniform();
  const std::vector<double> quarter(xs.begin(), xs.begin() + 10000);
  const double ratio = empirical_moment(quarter).se / empirical_moment(xs).se;
  CHECK(ratio == Approx(2.0).epsilon(0.05));
}

TEST_CASE("within and z score") {
  EstimateWithError e;
  e.value = 1.0;
  e.se = 0.1;
  CHECK(e.within(1.39));
  CHECK_FALSE(e.within(1.41));
  CHECK(e.z_score(1.2) == Approx(-2.0));
  EstimateWithError d;
  d.value = 2.0;
  d.se = 0.0;
  d.degenerate = true;
  CHECK(d.within(2.0));
  CHECK_FALSE(d.within(2.0 + 1e-9));
}

TEST_CASE("ks distance examples") {
  const std::vector<double> a{0.3, 0.1, 0.9, 0.5};
  CHECK(ks_distance(a, a) == 0.0);
  const std::vector<double> zeros(6, 0.0), ones(6, 1.0);
  CHECK(ks_distance(zeros, ones) == 1.0);
  const std::vector<double> b{0.0, 1.0, 0.0, 1.0}, c{1.0, 0.0, 1.0, 0.0};
  CHECK(ks_distance(b, c) == 0.0);
  const std::vector<double> d{0.0, 1.0, 2.0, 3.0}, e{0.5, 1.5};
  // brute force over every jump point
  double best = 0.0;
  for (double x : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    double fd = 0, fe = 0;
    for (double v : d) fd += v <= x;
    for (double v : e) fe += v <= x;
    best = std::max(best, std::abs(fd / 4 - fe / 2));
  }
  CHECK(ks_distance(d, e) == Approx(best));
}

TEST_CASE("trend verdict examples") {
  CHECK(trend_verdict(std::vector<double>{0.4, 0.2, 0.1, 0.05}, 0.1).pass);
  CHECK_FALSE(trend_verdict(std::vector<double>{0.1, 0.2, 0.4, 0.8}, 0.1).pass);
  CHECK(trend_verdict(std::vector<double>{0.4, 0.2, 0.105, 0.1}, 0.2).pass);
  CHECK_FALSE(trend_verdict(std::vector<double>{0.4, 0.2, 0.1, 0.15}, 0.2).pass);
  CHECK_FALSE(trend_verdict(std::vector<double>{0.4, 0.2, 0.1, 0.09}, 0.05).pass);
}

TEST_CASE("trend verdict floor absorbs round-off") {
  const std::vector<double> e{3e-13, 2e-12, 1e-12, 1e-11};
  CHECK(trend_verdict(e, 0.05).pass);
  CHECK_FALSE(trend_verdict(e, 0.05, 1.10, 0.0).pass);
}

TEST_CASE("loosening never flips pass to fail") {
  Stream rng(5, 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> e(6);
    for (auto& x : e) x = rng.uniform() * 0.3;
    for (double thr : {0.05, 0.1, 0.2})
      for (double slack : {1.0, 1.1, 1.5}) {
        if (!trend_verdict(e, thr, slack).pass) continue;
        CHECK(trend_verdict(e, thr * 1.5, slack).pass);
        CHECK(trend_verdict(e, thr, slack * 1.2).pass);
      }
  }
}

TEST_CASE("chi square goodness of fit") {
  const std::vector<double> obs{25, 25, 25, 25}, p{0.25, 0.25, 0.25, 0.25};
  const auto r = chi_square_gof(obs, p);
  CHECK(r.statistic == Approx(0.0));
  CHECK(r.p_value == Approx(1.0));
  const std::vector<double> obs2{30, 20, 25, 25};
  const auto s = chi_square_gof(obs2, p);
  CHECK(s.statistic == Approx(2.0));
  CHECK(s.dof == 3.0);
  // sparse cells are pooled
  const std::vector<double> obs3{90, 8, 1, 1}, p3{0.9, 0.08, 0.01, 0.01};
  CHECK(chi_square_gof(obs3, p3).cells == 3);
}
