#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace selfsim {

struct EstimateWithError {
  double value = 0.0;
  double se = 0.0;
  std::size_t count = 0;
  std::vector<std::uint64_t> seeds;
  bool degenerate = false;  // every sample identical, so se is exactly zero

  /// |value - target| <= k * se, with an exact match required when se == 0.
  bool within(double target, double k = 4.0) const;
  double z_score(double target) const;
};

/// Mean of x^p with a jackknife standard error. Needs at least two samples.
EstimateWithError empirical_moment(std::span<const double> samples, double p = 1.0);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b| of the right-continuous ECDFs.
double ks_distance(std::span<const double> a, std::span<const double> b);

struct TrendVerdict {
  bool pass = false;
  double final_error = 0.0;
  std::string report;
};

/// Passes iff the errors over the last half of the grid never grow by more than `slack`
/// from one point to the next and the final error is below `threshold`. Errors below
/// `floor` count as equal to it, so round-off noise never reads as growth.
TrendVerdict trend_verdict(std::span<const double> errors, double threshold, double slack = 1.10,
                           double floor = 1e-9);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::size_t cells = 0;
};

/// Pearson goodness of fit of observed counts against cell probabilities.
/// Cells whose expected count is below `min_expected` are pooled into one.
ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> probs,
                               double min_expected = 5.0);

}  // namespace selfsim
