#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "selfsim/kernels.hpp"

namespace selfsim {

/// E[A_n^p] for 0 <= n <= n_max and 0 <= p <= p_max.
struct MomentTable {
  std::string kernel_id;
  std::size_t n_max = 0;
  std::size_t p_max = 0;
  std::vector<std::vector<double>> values;  // values[n][p]
  std::vector<double> scaling;              // a_n

  double moment(std::size_t n, std::size_t p) const { return values.at(n).at(p); }
  double normalized(std::size_t n, std::size_t p) const;
  /// Columns n, p, moment, moment / a_n^p for the requested states.
  void write_csv(std::ostream& out, const std::vector<std::size_t>& states) const;
};

/// First-step analysis on a kernel whose only absorbing state is 0. The self-loop at each
/// state is solved in closed form, so heavy diagonals cost nothing extra.
MomentTable absorption_moments(const Kernel& kernel, std::size_t n_max, std::size_t p_max);

struct AbsorptionDistribution {
  std::vector<double> pmf;  // P(A_n = k) for k = 0 .. k_max
  double tail = 0.0;        // P(A_n > k_max)
};

/// Pushes the law of X_n(k) forward and records newly absorbed mass. k_max = 0 selects
/// the default 50 a_n.
AbsorptionDistribution absorption_distribution(const Kernel& kernel, std::size_t n,
                                               std::size_t k_max = 0);

/// Exact law of X_n(k).
std::vector<double> state_distribution(const Kernel& kernel, std::size_t n, std::size_t k,
                                       double cost_budget = 5e10);

/// E[(X_n(floor(a_n t)) / n)^lambda].
double marginal_moment(const Kernel& kernel, std::size_t n, double t, double lambda,
                       double cost_budget = 5e10);

}  // namespace selfsim
