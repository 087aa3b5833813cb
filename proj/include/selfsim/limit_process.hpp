#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "selfsim/chain.hpp"
#include "selfsim/measures.hpp"
#include "selfsim/random.hpp"

namespace selfsim {

/// Jumps above a cutoff plus a compensating drift, on [0, horizon], possibly killed.
struct SubordinatorPath {
  std::vector<double> jump_times;
  std::vector<double> jump_sizes;
  std::vector<double> jump_cumsum;  // xi jump part right after each jump
  double drift = 0.0;               // d + int_0^eps y omega(dy)
  double killing_time = std::numeric_limits<double>::infinity();
  double horizon = 0.0;
  double eps_cut = 0.0;
  double neglected_variance = 0.0;  // int_0^eps y^2 omega(dy), per unit time

  bool killed() const { return killing_time <= horizon; }
  /// xi_t for t <= horizon; +inf from the killing time on.
  double xi(double t) const;
  /// xi just before time t.
  double xi_before(double t) const;
};

/// Precomputed simulation scheme for one Levy triple: cutoff, drift, jump rates and the
/// inverse tail table of the jump sizes.
class SubordinatorSampler {
 public:
  /// eps_cut <= 0 selects the cutoff so that int_0^eps y^2 omega(dy) <= 1e-6 / horizon.
  SubordinatorSampler(const LevyTriple& triple, double horizon, double eps_cut = 0.0);

  SubordinatorPath sample(Stream& rng) const;
  /// Continues the path on (path.horizon, new_horizon] using the Markov property.
  void extend(SubordinatorPath& path, double new_horizon, Stream& rng) const;
  double sample_jump(Stream& rng) const;

  double eps_cut() const { return eps_; }
  double drift() const { return drift_; }
  double jump_rate() const { return rate_; }
  double neglected_variance() const { return neglected_variance_; }
  double horizon() const { return horizon_; }
  const LevyTriple& triple() const { return triple_; }

  /// y with omega_density((y, inf)) = u * omega_density((eps, inf)), from the tail table.
  double invert_density_tail(double u) const;
  /// omega_density((y, inf)) by quadrature, for checks.
  double density_tail(double y) const;

 private:
  void build_table();

  LevyTriple triple_;
  LevyMeasure density_part_;
  double horizon_;
  double eps_ = 0.0;
  double drift_ = 0.0;
  double neglected_variance_ = 0.0;
  double rate_ = 0.0;
  double density_rate_ = 0.0;
  std::vector<Atom> big_atoms_;  // (y, rate) with y > eps
  // log y grid, log tail, and d log tail / d log y
  std::vector<double> s_;
  std::vector<double> log_tail_;
  std::vector<double> slope_;
  double far_decay_ = 1.0;
};

SubordinatorPath sample_subordinator(const LevyTriple& triple, double eps_cut, double horizon,
                                     Stream& rng);

/// One piece of the Lamperti image: real time [real_start, real_start + real_len) with
/// xi = xi_start + slope (r - real_start), mapped to clock time [clock_start, clock_start + clock_len).
struct LampertiSegment {
  double real_start;
  double real_len;
  double xi_start;
  double slope;
  double clock_start;
  double clock_len;
};

struct LimitSample {
  double gamma = 1.0;
  std::vector<LampertiSegment> segments;
  double I = 0.0;      // int exp(-gamma xi) over the simulated horizon, plus tail_correction
  double sigma = 0.0;  // first zero of Y, from the clock of the segments
  bool killed = false;
  double killing_time = std::numeric_limits<double>::infinity();
  double tail_correction = 0.0;  // exp(-gamma xi_T) / psi(gamma), the mean of the rest
  bool horizon_ok = true;

  /// Y(t) = exp(-xi(tau(t))); 0 after the last simulated clock time.
  double Y(double t) const;
  /// tau(t), the real time reached at clock time t (+inf past the simulated clock).
  double tau(double t) const;
};

/// Lamperti transform of a simulated path. psi_gamma > 0 enables the tail correction of I
/// for unkilled paths and the horizon check against tail_tol.
LimitSample lamperti(const SubordinatorPath& path, double gamma,
                     double psi_gamma = std::numeric_limits<double>::quiet_NaN(),
                     double tail_tol = 1e-4);

/// Samples a path long enough for the I tail criterion and returns its Lamperti image.
LimitSample sample_limit(const SubordinatorSampler& sampler, double gamma, double psi_gamma,
                         Stream& rng, double tail_tol = 1e-4, std::size_t max_extensions = 200);

/// E[sigma^p] = p! / prod_{i <= p} psi(gamma i) for p = 0 .. p_max.
std::vector<double> analytic_moments(const std::function<double(double)>& psi, double gamma,
                                     std::size_t p_max);
std::vector<double> analytic_moments(const FiniteMeasure& mu, double gamma, std::size_t p_max);

struct GapComposition {
  Composition composition;
  std::size_t uncovered_balls = 0;  // balls that fell on the drift-covered part of the range
  bool insufficient = false;
};

/// Blocks of balls sharing a gap of the closed range of 1 - exp(-xi). The path must reach
/// past every ball; balls on the drift-covered range form singletons.
GapComposition balls_in_gaps(const SubordinatorPath& path, std::span<const double> uniforms);
/// Samples a path and n uniforms, extending the path until it covers every ball.
GapComposition balls_in_gaps(const SubordinatorSampler& sampler, std::size_t n, Stream& rng);

}  // namespace selfsim
