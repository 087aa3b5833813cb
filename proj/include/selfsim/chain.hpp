#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "selfsim/kernels.hpp"
#include "selfsim/random.hpp"
#include "selfsim/time_change.hpp"

namespace selfsim {

struct ChainPath {
  std::size_t n = 0;
  std::vector<std::size_t> states;  // X_n(0..A_n)
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string kernel_id;

  std::size_t absorption_time() const { return states.size() - 1; }
  /// X_n(k), frozen at the absorbing state after A_n.
  std::size_t at(std::size_t k) const { return states[std::min(k, states.size() - 1)]; }
};

constexpr std::size_t kDefaultStepCap = 1'000'000'000;

/// Runs the chain from n until it enters its absorbing set.
ChainPath sample_path(const Kernel& kernel, std::size_t n, Stream& rng,
                      std::size_t step_cap = kDefaultStepCap);

/// Y_n(t) = X_n(floor(a_n t)) / n and its Lamperti time change Z_n.
class RescaledPath {
 public:
  RescaledPath(const ChainPath& path, double a_n, double gamma);

  double Y(double t) const { return tc_.f()(t); }
  double Z(double t) const { return tc_.g()(t); }
  /// Z-time to Y-time: tau_n_inv(t) = int_0^t Z_n^gamma.
  double tau_inv(double t) const { return tc_.tau_inv(t); }
  double tau(double t) const { return tc_.tau(t); }
  /// Chain step floor(a_n tau_n_inv(t)) in force at Z-time t.
  std::size_t step_at(double t) const;
  /// First Z-time with Z_n <= eps (+inf if never).
  double T_eps(double eps) const;
  /// sum over the constancy intervals of Z_n before absorption of value^gamma * length;
  /// equals A_n / a_n.
  double absorption_integral() const;

  const TimeChange& time_change() const { return tc_; }
  const ChainPath& path() const { return path_; }
  double a_n() const { return a_n_; }

 private:
  ChainPath path_;
  double a_n_;
  TimeChange tc_;
};

RescaledPath rescale(const ChainPath& path, double a_n, double gamma);
RescaledPath rescale(const ChainPath& path, const Kernel& kernel);

/// G_j(lambda) and 1 - G_j(lambda) for every state j <= n_max.
struct GeneratingTable {
  double lambda = 1.0;
  std::vector<double> g;
  std::vector<double> one_minus_g;

  static GeneratingTable build(const Kernel& kernel, std::size_t n_max, double lambda);
};

struct MartingaleValue {
  double value = 0.0;
  bool overflow = false;
};

/// Upsilon_n(k) = (X(k)/n)^lambda / prod_{i<k} G_{X(i)}(lambda); 0 once X hits 0.
MartingaleValue martingale_upsilon(const ChainPath& path, const GeneratingTable& table,
                                   std::size_t k, double log_bound = 700.0);

/// (X(k)/n)^lambda + sum_{i<k} (X(i)/n)^lambda (1 - G_{X(i)}(lambda)).
double additive_martingale(const ChainPath& path, const GeneratingTable& table, std::size_t k);

/// M_n(t ^ T_{n,eps}) = Z_n(s)^lambda / prod_{i < step_at(s)} G_{X(i)}(lambda), s = t ^ T_{n,eps}.
MartingaleValue martingale_M(const RescaledPath& rescaled, const GeneratingTable& table, double t,
                             double eps, double log_bound = 700.0);

/// Walk with a barrier, its truncated and its ignored-jump versions, driven by one
/// i.i.d. sequence of jumps.
struct CoupledTriple {
  std::vector<std::size_t> tilde;          // truncated walk, up to its absorption
  std::vector<std::size_t> x;              // barrier walk read along the acceptance times
  std::vector<std::size_t> hat;            // ignored-jump walk, up to its absorption
  std::vector<std::size_t> acceptance;     // T_k, so that x[k] == hat[acceptance[k]]

  static std::size_t at(const std::vector<std::size_t>& v, std::size_t k) {
    return v[std::min(k, v.size() - 1)];
  }
};

CoupledTriple coupled_barrier_triple(const StepDistribution& q, std::size_t n, Stream& rng,
                                     std::size_t step_cap = kDefaultStepCap);

struct Composition {
  std::vector<std::size_t> parts;
  std::size_t length() const { return parts.size(); }
};

/// Parts X(i-1) - X(i) of a path of a strictly decreasing chain absorbed at 0.
Composition composition_from_path(const ChainPath& path);

}  // namespace selfsim
