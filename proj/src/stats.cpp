#include "selfsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "selfsim/numeric.hpp"

namespace selfsim {

bool EstimateWithError::within(double target, double k) const {
  if (se == 0.0) return value == target;
  return std::abs(value - target) <= k * se;
}

double EstimateWithError::z_score(double target) const {
  if (se == 0.0) return value == target ? 0.0 : std::copysign(INFINITY, value - target);
  return (value - target) / se;
}

EstimateWithError empirical_moment(std::span<const double> samples, double p) {
  const std::size_t n = samples.size();
  if (n < 2) throw PreconditionError("empirical_moment: need at least two samples");
  if (!(p >= 0.0)) throw DomainError("empirical_moment: p must be >= 0");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = p == 1.0 ? samples[i] : std::pow(samples[i], p);
  CompensatedSum total;
  for (double x : v) total.add(x);
  const double sum = total.value();
  const double mean = sum / static_cast<double>(n);
  // leave-one-out means theta_i = (sum - v_i) / (n - 1)
  const double nm1 = static_cast<double>(n - 1);
  CompensatedSum theta_bar;
  for (double x : v) theta_bar.add((sum - x) / nm1);
  const double tb = theta_bar.value() / static_cast<double>(n);
  CompensatedSum ss;
  bool constant = true;
  for (double x : v) {
    const double d = (sum - x) / nm1 - tb;
    ss.add(d * d);
    if (x != v[0]) constant = false;
  }
  EstimateWithError out;
  out.value = mean;
  out.count = n;
  out.degenerate = constant;
  out.se = constant ? 0.0 : std::sqrt(nm1 / static_cast<double>(n) * ss.value());
  return out;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("ks_distance: samples must be non-empty");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    // advance past every tie so both ECDFs are evaluated at t itself
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

TrendVerdict trend_verdict(std::span<const double> errors, double threshold, double slack, double floor) {
  TrendVerdict v;
  if (errors.size() < 4) {
    v.report = fmt::format("need at least 4 grid points, got {}", errors.size());
    return v;
  }
  v.final_error = errors.back();
  bool monotone = true;
  std::string steps;
  for (std::size_t i = errors.size() / 2; i + 1 < errors.size(); ++i) {
    // below the floor an error is numerically zero and carries no trend
    const bool ok = errors[i + 1] <= slack * std::max(errors[i], floor);
    monotone = monotone && ok;
    if (!ok) steps += fmt::format(" grew at {}->{} ({:.4g} > {:.2f} x {:.4g});", i, i + 1, errors[i + 1], slack, errors[i]);
  }
  const bool small = errors.back() < threshold;
  v.pass = monotone && small;
  v.report = fmt::format("final error {:.4g} vs threshold {:.4g}: {}; last-half trend {}{}", v.final_error,
                         threshold, small ? "ok" : "too large", monotone ? "ok" : "broken:", steps);
  return v;
}

ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> probs,
                               double min_expected) {
  if (observed.size() != probs.size() || observed.empty()) {
    throw PreconditionError("chi_square_gof: observed and probs must have the same non-zero size");
  }
  double total = 0.0;
  for (double o : observed) total += o;
  ChiSquareResult r;
  double pooled_o = 0.0, pooled_e = 0.0;
  CompensatedSum stat;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = probs[i] * total;
    if (e < min_expected) {
      pooled_o += observed[i];
      pooled_e += e;
      continue;
    }
    stat.add((observed[i] - e) * (observed[i] - e) / e);
    ++r.cells;
  }
  if (pooled_e > 0.0) {
    stat.add((pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e);
    ++r.cells;
  } else if (pooled_o > 0.0) {
    // mass observed where the model puts none
    r.statistic = INFINITY;
    r.dof = r.cells > 1 ? static_cast<double>(r.cells - 1) : 1.0;
    r.p_value = 0.0;
    return r;
  }
  r.statistic = stat.value();
  r.dof = r.cells > 1 ? static_cast<double>(r.cells - 1) : 1.0;
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

}  // namespace selfsim
