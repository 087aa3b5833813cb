#include "selfsim/numeric.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <string>

namespace selfsim {

double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

double log_gamma(double x) {
  // lgamma_r leaves the global signgam alone, so this is safe from worker threads.
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("log_beta: arguments must be positive");
  }
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double log_binomial(double n, double k) {
  if (k < 0.0 || k > n) {
    throw DomainError("log_binomial: k outside [0, n]");
  }
  if (k == 0.0 || k == n) return 0.0;
  return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

double bracket(double lambda, double x) {
  if (!(lambda > 0.0)) {
    throw DomainError("bracket: lambda must be positive, got " + std::to_string(lambda));
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("bracket: x must lie in [0, 1], got " + std::to_string(x));
  }
  if (x == 1.0) return lambda;
  if (x == 0.0) return 1.0;
  const double w = 1.0 - x;  // exact for x >= 1/2
  // 1 - x^lambda without cancellation near x = 1
  const double num = -std::expm1(lambda * std::log1p(-w));
  return num / w;
}

double chi_square_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, x));
}

}  // namespace selfsim
