#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "selfsim/measures.hpp"
#include "selfsim/stats.hpp"

namespace selfsim {

/// Transition probabilities out of one state n, stored densely on [lo, lo + p.size()).
/// Everything outside that window is zero.
struct Row {
  std::size_t lo = 0;
  std::vector<double> p;

  std::size_t hi() const { return lo + p.size() - 1; }
  double at(std::size_t k) const { return k >= lo && k - lo < p.size() ? p[k - lo] : 0.0; }
};

/// Law of the i.i.d. jumps of a walk with a barrier.
class StepDistribution {
 public:
  /// q_k for k = 0 .. q.size() - 1; must sum to 1.
  static StepDistribution finite(std::vector<double> q);
  /// Tail qbar_n = (n + 1)^(-gamma) for n >= 0, so q_0 = 0.
  static StepDistribution power_tail(double gamma);

  double pmf(std::size_t k) const;
  /// qbar_k = sum_{j > k} q_j.
  double tail(std::size_t k) const;
  /// 1 - qbar_k, computed without cancellation.
  double cdf(std::size_t k) const;

  bool finite_mean() const { return std::isfinite(mean_); }
  double mean() const { return mean_; }
  /// Index gamma of regular variation of the tail, or 0 when the support is finite.
  double tail_index() const { return tail_index_; }
  /// Largest k with q_k > 0, or SIZE_MAX for infinite support.
  std::size_t support_max() const;

  /// Smallest k <= cap with cdf(k) >= u * cdf(cap): a draw of the jump conditioned on
  /// being at most `cap`. Requires cdf(cap) > 0.
  std::size_t sample_at_most(double u, std::size_t cap) const;
  /// Smallest k <= cap with cdf(k) >= u, or cap + 1 when the draw exceeds cap.
  std::size_t quantile(double u, std::size_t cap) const;

  const std::string& id() const { return id_; }

 private:
  std::vector<double> q_;
  std::vector<double> cdf_;
  std::vector<double> tail_;
  double gamma_ = 0.0;
  double mean_ = 0.0;
  double tail_index_ = 0.0;
  std::string id_;
};

/// A non-increasing transition law with its scaling sequence and limiting exponent.
///
/// Rows are computed on demand and memoized; concurrent readers are safe and the first
/// writer of a row wins (rows are deterministic, so losers just drop their copy).
class Kernel : public std::enable_shared_from_this<Kernel> {
 public:
  virtual ~Kernel() = default;

  virtual std::string id() const = 0;
  /// Fresh computation of row n, bypassing the memo.
  virtual Row compute_row(std::size_t n) const = 0;
  /// a_n, with a_0 = 1.
  virtual double scaling(std::size_t n) const = 0;

  std::shared_ptr<const Row> row(std::size_t n) const;
  double prob(std::size_t n, std::size_t k) const { return row(n)->at(k); }

  /// Index of regular variation of a_n; 0 when the kernel is outside the scaling regime.
  double gamma() const { return gamma_; }
  /// Measure mu of Hypothesis (H), whose Laplace exponent is the limit target.
  const FiniteMeasure& target_measure() const { return target_; }
  virtual double target_psi(double lambda) const;

  virtual bool absorbing(std::size_t n) const;
  /// 1 - p_{n,n} as a compensated sum of the off-diagonal entries.
  double leave_probability(std::size_t n) const;

  /// Next state from n for a uniform u; inverse CDF scanning down from the top of the row.
  virtual std::size_t sample_next(std::size_t n, double u) const;

 protected:
  Kernel(double gamma, FiniteMeasure target) : gamma_(gamma), target_(std::move(target)) {}
  static void check_row(const Row& r, std::size_t n, const std::string& who);

  double gamma_;
  FiniteMeasure target_;

 private:
  mutable std::shared_mutex memo_mutex_;
  mutable std::unordered_map<std::size_t, std::shared_ptr<const Row>> memo_;
};

using KernelPtr = std::shared_ptr<const Kernel>;

/// Construction of Hypothesis (H) kernels for an arbitrary finite mu and a_n = ell * n^gamma.
KernelPtr canonical_kernel(const FiniteMeasure& mu, double gamma, double ell = 1.0,
                           std::string id = "canonical");

KernelPtr barrier_kernel(const StepDistribution& q);
/// Overflowing jumps send the walk to 0.
KernelPtr truncated_kernel(const StepDistribution& q);
/// Overflowing jumps are ignored.
KernelPtr ignored_jump_kernel(const StepDistribution& q);

/// Block-counting chain of a Lambda-coalescent; absorbed at 1 (and 0).
KernelPtr coalescent_kernel(const FiniteMeasure& lambda_measure, std::string id = "coalescent");

/// Strictly decreasing chain of the regenerative composition built from the Levy measure.
KernelPtr composition_kernel(const LevyMeasure& omega, std::string id = "composition");

/// Kernel given by explicit rows; row n is rows[n] on {0..n}.
KernelPtr tabulated_kernel(std::vector<std::vector<double>> rows,
                           std::function<double(std::size_t)> scaling = {}, double gamma = 0.0,
                           FiniteMeasure target = {}, std::string id = "tabulated");

/// Kernel given by a row callback, used for ad hoc laws.
KernelPtr function_kernel(std::function<Row(std::size_t)> row_fn,
                          std::function<double(std::size_t)> scaling, double gamma,
                          FiniteMeasure target, std::string id);

/// Every absorbing state other than 0 is redirected to 0 in one step.
KernelPtr collapse_absorbing(KernelPtr kernel);

/// Coalescent ingredients exposed for checks.
struct CoalescentRates {
  std::vector<double> g;  // g_{n,k} for k = 1 .. n-1, stored at index k
  double total = 0.0;     // g_n
};
CoalescentRates coalescent_rates(const FiniteMeasure& lambda_measure, std::size_t n,
                                 bool force_quadrature = false);
/// h(u) = int_{[u,1]} x^-2 Lambda(dx).
double coalescent_h(const FiniteMeasure& lambda_measure, double u);
/// Index beta of regular variation of h at 0, read off the density exponents.
double coalescent_beta(const FiniteMeasure& lambda_measure);
/// The measure whose Laplace exponent is the coalescent limit, with the 1/Gamma(2-beta)
/// factor included.
FiniteMeasure coalescent_target(const FiniteMeasure& lambda_measure);

/// G_n(lambda) = sum_k (k/n)^lambda p_{n,k}, with G_0 = 0.
double generating_function(const Kernel& kernel, std::size_t n, double lambda);
/// 1 - G_n(lambda) summed term by term, so it keeps full relative precision.
double one_minus_generating_function(const Kernel& kernel, std::size_t n, double lambda);

struct DiagnosticEntry {
  std::size_t n;
  double lambda;
  double value;   // a_n (1 - G_n(lambda))
  double target;  // psi(lambda)
  double rel_error;
};

struct DiagnosticTable {
  std::vector<DiagnosticEntry> entries;
  std::vector<double> lambdas;
  std::vector<TrendVerdict> verdicts;  // one per lambda
  bool pass() const;
};

DiagnosticTable hypothesis_h_diagnostic(const Kernel& kernel, std::span<const double> lambda_grid,
                                        std::span<const std::size_t> n_grid, double threshold);

}  // namespace selfsim
