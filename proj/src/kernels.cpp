#include "selfsim/kernels.hpp"

#include <algorithm>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace selfsim {

// ---------------------------------------------------------------------------------------
// StepDistribution

StepDistribution StepDistribution::finite(std::vector<double> q) {
  if (q.empty()) throw DomainError("finite step distribution: empty pmf");
  CompensatedSum total;
  for (double x : q) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("finite step distribution: bad mass");
    total.add(x);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw DomainError(fmt::format("finite step distribution: masses sum to {}", total.value()));
  }
  if (!(q[0] < 1.0)) throw DomainError("finite step distribution: q_0 must be < 1");
  while (q.size() > 1 && q.back() == 0.0) q.pop_back();
  StepDistribution d;
  d.q_ = q;
  d.cdf_.resize(q.size());
  d.tail_.resize(q.size());
  CompensatedSum up;
  for (std::size_t k = 0; k < q.size(); ++k) {
    up.add(q[k]);
    d.cdf_[k] = up.value();
  }
  CompensatedSum down;
  for (std::size_t k = q.size(); k-- > 0;) {
    d.tail_[k] = down.value();
    down.add(q[k]);
  }
  CompensatedSum mean;
  for (std::size_t k = 1; k < q.size(); ++k) mean.add(static_cast<double>(k) * q[k]);
  d.mean_ = mean.value();
  std::string body;
  for (std::size_t k = 0; k < q.size(); ++k) body += fmt::format("{}{:.6g}", k ? "," : "", q[k]);
  d.id_ = "finite[" + body + "]";
  return d;
}

StepDistribution StepDistribution::power_tail(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("power_tail: gamma must be > 0");
  StepDistribution d;
  d.gamma_ = gamma;
  d.tail_index_ = gamma;
  d.mean_ = gamma > 1.0 ? boost::math::zeta(gamma) : std::numeric_limits<double>::infinity();
  d.id_ = fmt::format("power_tail{{{}}}", gamma);
  return d;
}

double StepDistribution::pmf(std::size_t k) const {
  if (gamma_ == 0.0) return k < q_.size() ? q_[k] : 0.0;
  if (k == 0) return 0.0;
  const double kd = static_cast<double>(k);
  // k^-g - (k+1)^-g = k^-g (1 - (1 + 1/k)^-g)
  return std::pow(kd, -gamma_) * -std::expm1(-gamma_ * std::log1p(1.0 / kd));
}

double StepDistribution::tail(std::size_t k) const {
  if (gamma_ == 0.0) return k < tail_.size() ? tail_[k] : 0.0;
  return std::exp(-gamma_ * std::log1p(static_cast<double>(k)));
}

double StepDistribution::cdf(std::size_t k) const {
  if (gamma_ == 0.0) return k < cdf_.size() ? cdf_[k] : 1.0;
  return -std::expm1(-gamma_ * std::log1p(static_cast<double>(k)));
}

std::size_t StepDistribution::support_max() const {
  return gamma_ == 0.0 ? q_.size() - 1 : std::numeric_limits<std::size_t>::max();
}

std::size_t StepDistribution::sample_at_most(double u, std::size_t cap) const {
  cap = std::min(cap, support_max());
  return std::min(cap, quantile(u * cdf(cap), cap));
}

std::size_t StepDistribution::quantile(double u, std::size_t cap) const {
  if (u > cdf(cap)) return cap + 1;
  const double target = u;
  std::size_t lo = 0, hi = std::min(cap, support_max());
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (cdf(mid) >= target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

// ---------------------------------------------------------------------------------------
// Kernel base

std::shared_ptr<const Row> Kernel::row(std::size_t n) const {
  {
    std::shared_lock lock(memo_mutex_);
    auto it = memo_.find(n);
    if (it != memo_.end()) return it->second;
  }
  auto fresh = std::make_shared<const Row>(compute_row(n));
  std::unique_lock lock(memo_mutex_);
  auto [it, inserted] = memo_.emplace(n, std::move(fresh));
  return it->second;
}

double Kernel::target_psi(double lambda) const { return laplace_exponent(target_, lambda); }

bool Kernel::absorbing(std::size_t n) const { return row(n)->at(n) == 1.0; }

double Kernel::leave_probability(std::size_t n) const {
  auto r = row(n);
  CompensatedSum s;
  for (std::size_t i = 0; i < r->p.size(); ++i) {
    if (r->lo + i != n) s.add(r->p[i]);
  }
  return s.value();
}

std::size_t Kernel::sample_next(std::size_t n, double u) const {
  auto r = row(n);
  double cum = 0.0;
  for (std::size_t i = r->p.size(); i-- > 0;) {
    cum += r->p[i];
    if (u <= cum) return r->lo + i;
  }
  // u beyond the rounded total: fall back to the lowest state carrying mass
  for (std::size_t i = 0; i < r->p.size(); ++i) {
    if (r->p[i] > 0.0) return r->lo + i;
  }
  return r->lo;
}

void Kernel::check_row(const Row& r, std::size_t n, const std::string& who) {
  if (r.p.empty() || r.hi() > n) {
    throw Error(fmt::format("{}: row {} is not supported on {{0..{}}}", who, n, n));
  }
  CompensatedSum s;
  for (std::size_t i = 0; i < r.p.size(); ++i) {
    if (!(r.p[i] >= 0.0) || !std::isfinite(r.p[i])) {
      throw Error(fmt::format("{}: row {} has invalid entry p[{}] = {}", who, n, r.lo + i, r.p[i]));
    }
    s.add(r.p[i]);
  }
  if (std::abs(s.value() - 1.0) > 1e-12) {
    throw Error(fmt::format("{}: row {} sums to {:.17g}", who, n, s.value()));
  }
}

namespace {

// Removes rounding-level negatives that arise when a diagonal is formed as 1 - sum.
void clean_row(Row& r) {
  for (double& x : r.p) {
    if (x < 0.0 && x > -1e-15) x = 0.0;
  }
}

// ---------------------------------------------------------------------------------------

class CanonicalKernel final : public Kernel {
 public:
  CanonicalKernel(const FiniteMeasure& mu, double gamma, double ell, std::string id)
      : Kernel(gamma, mu), ell_(ell), id_(std::move(id)) {
    mu.validate();
    if (!(gamma > 0.0) || !(ell > 0.0)) throw DomainError("canonical: gamma and ell must be positive");
    mass_ = mu.total_mass();
    prob_ = mu.scaled(1.0 / mass_);
    gamma_prime_ = (std::max(1.0, gamma) + gamma + 1.0) / 2.0;
  }

  std::string id() const override { return id_; }
  double scaling(std::size_t n) const override {
    return n == 0 ? 1.0 : ell_ * std::pow(static_cast<double>(n), gamma_);
  }

  Row compute_row(std::size_t n) const override {
    if (n == 0) return {0, {1.0}};
    const double nd = static_cast<double>(n);
    const double a = scaling(n) / mass_;  // sequence paired with the normalized measure
    Row r{0, std::vector<double>(n + 1, 0.0)};
    const bool window = a > 1.0;
    const Interval iv{0.0, 1.0 - 1.0 / a, false};
    if (window) {
      for (std::size_t k = 0; k < n; ++k) {
        const double kd = static_cast<double>(k);
        r.p[k] = prob_.binomial_moment(log_binomial(nd, kd) - std::log(a), kd, nd - kd - 1.0, iv);
      }
    }
    const double correction = std::pow(nd, 1.0 - gamma_prime_) * prob_.atom1();
    const double shift = std::floor(std::pow(nd, gamma_prime_) / a);
    const bool placed = correction > 0.0 && shift >= 1.0 && shift <= nd;
    if (placed) r.p[n - static_cast<std::size_t>(shift)] += correction;
    CompensatedSum off;
    for (std::size_t k = 0; k < n; ++k) off.add(r.p[k]);
    r.p[n] = 1.0 - off.value();
    // the diagonal by its own formula, with b_n from an independent quadrature
    double b = 0.0;
    if (window) {
      b = prob_.integrate([n](double x) { return bracket(static_cast<double>(n), x); }, iv).value / a;
    }
    const double formula = 1.0 - b - (placed ? correction : 0.0);
    if (std::abs(formula - r.p[n]) > 1e-7 * std::max(1.0, nd)) {
      throw Error(fmt::format("canonical: row {} diagonal {:.12g} disagrees with 1 - b_n = {:.12g}", n,
                              r.p[n], formula));
    }
    clean_row(r);
    if (r.p[n] < 0.0) {
      throw Error(fmt::format("canonical: row {} has negative diagonal {}; n is too small for gamma' = {}",
                              n, r.p[n], gamma_prime_));
    }
    check_row(r, n, id_);
    return r;
  }

 private:
  double ell_;
  double mass_ = 1.0;
  double gamma_prime_ = 1.0;
  FiniteMeasure prob_;
  std::string id_;
};

enum class BarrierMode { kBarrier, kTruncated, kIgnored };

struct BarrierRegime {
  double gamma;
  FiniteMeasure target;
  bool heavy;
};

BarrierRegime barrier_regime(const StepDistribution& q, BarrierMode mode) {
  if (q.finite_mean()) {
    return {1.0, FiniteMeasure::atom(q.mean(), 1.0), false};
  }
  const double g = q.tail_index();
  if (!(g > 0.0 && g < 1.0)) {
    throw PreconditionError(
        fmt::format("barrier: tail index {} is outside the heavy-tailed regime (0, 1)", g));
  }
  FiniteMeasure target = FiniteMeasure::barrier(g);
  if (mode == BarrierMode::kTruncated) target = target + FiniteMeasure::atom(1.0, 0.0);
  return {g, target, true};
}

class BarrierKernel final : public Kernel {
 public:
  BarrierKernel(StepDistribution q, BarrierMode mode, BarrierRegime regime)
      : Kernel(regime.gamma, regime.target), q_(std::move(q)), mode_(mode), heavy_(regime.heavy) {}

  std::string id() const override {
    const char* name = mode_ == BarrierMode::kBarrier     ? "barrier"
                       : mode_ == BarrierMode::kTruncated ? "truncated"
                                                          : "ignored";
    return fmt::format("{}{{{}}}", name, q_.id());
  }

  double scaling(std::size_t n) const override {
    if (n == 0) return 1.0;
    return heavy_ ? 1.0 / q_.tail(n) : static_cast<double>(n);
  }

  bool absorbing(std::size_t n) const override {
    switch (mode_) {
      case BarrierMode::kBarrier:
        return q_.tail(n) == 1.0 || q_.pmf(0) >= q_.cdf(n);
      case BarrierMode::kTruncated:
        return n == 0;
      case BarrierMode::kIgnored:
        return q_.cdf(n) <= q_.pmf(0);
    }
    return false;
  }

  Row compute_row(std::size_t n) const override {
    const std::size_t smax = q_.support_max();
    const std::size_t lo_support = smax >= n ? 0 : n - smax;
    Row r;
    switch (mode_) {
      case BarrierMode::kBarrier: {
        const double mass = q_.cdf(n);
        if (q_.tail(n) == 1.0 || !(mass > 0.0)) return {n, {1.0}};
        r.lo = lo_support;
        r.p.resize(n - r.lo + 1);
        for (std::size_t j = r.lo; j <= n; ++j) r.p[j - r.lo] = q_.pmf(n - j) / mass;
        break;
      }
      case BarrierMode::kTruncated: {
        const double over = q_.tail(n);
        r.lo = over > 0.0 ? 0 : lo_support;
        r.p.resize(n - r.lo + 1);
        for (std::size_t j = r.lo; j <= n; ++j) r.p[j - r.lo] = q_.pmf(n - j);
        r.p[0] += r.lo == 0 ? over : 0.0;
        break;
      }
      case BarrierMode::kIgnored: {
        r.lo = lo_support;
        r.p.resize(n - r.lo + 1);
        for (std::size_t j = r.lo; j <= n; ++j) r.p[j - r.lo] = q_.pmf(n - j);
        r.p[n - r.lo] += q_.tail(n);
        break;
      }
    }
    renormalize(r);
    check_row(r, n, id());
    return r;
  }

  std::size_t sample_next(std::size_t n, double u) const override {
    if (absorbing(n)) return n;
    switch (mode_) {
      case BarrierMode::kBarrier:
        return n - q_.sample_at_most(u, n);
      case BarrierMode::kTruncated:
      case BarrierMode::kIgnored: {
        const std::size_t k = q_.quantile(u, n);
        if (k > n) return mode_ == BarrierMode::kTruncated ? 0 : n;
        return n - k;
      }
    }
    return n;
  }

  const StepDistribution& steps() const { return q_; }

 private:
  // Entries of a power-tail row are differences of tails, so their sum can miss 1 by a
  // few ulps per entry on long rows; rescale when that happens.
  static void renormalize(Row& r) {
    CompensatedSum s;
    for (double x : r.p) s.add(x);
    const double total = s.value();
    if (total != 1.0 && std::abs(total - 1.0) < 1e-9) {
      for (double& x : r.p) x /= total;
    }
  }

  StepDistribution q_;
  BarrierMode mode_;
  bool heavy_;
};

// ---------------------------------------------------------------------------------------

class CoalescentKernel final : public Kernel {
 public:
  CoalescentKernel(const FiniteMeasure& lambda, std::string id)
      : Kernel(0.0, {}), lambda_(lambda), id_(std::move(id)) {
    lambda.validate();
    if (lambda.atom0() > 0.0) {
      throw PreconditionError("coalescent: Lambda must not charge 0 in the staying-infinite regime");
    }
    try {
      const double inv = lambda.binomial_moment(0.0, -1.0, 0.0);
      if (!std::isfinite(inv)) throw DomainError("infinite");
    } catch (const DomainError&) {
      throw PreconditionError("coalescent: int x^-1 Lambda(dx) diverges");
    }
    const double beta = coalescent_beta(lambda);
    gamma_ = beta > 0.0 && beta < 1.0 ? beta : 0.0;
    target_ = coalescent_target(lambda);
  }

  std::string id() const override { return id_; }
  double scaling(std::size_t n) const override {
    return n <= 1 ? 1.0 : coalescent_h(lambda_, 1.0 / static_cast<double>(n));
  }
  bool absorbing(std::size_t n) const override { return n <= 1; }

  Row compute_row(std::size_t n) const override {
    if (n <= 1) return {n, {1.0}};
    const CoalescentRates rates = coalescent_rates(lambda_, n);
    Row r{1, std::vector<double>(n - 1)};
    for (std::size_t k = 1; k < n; ++k) r.p[k - 1] = rates.g[k] / rates.total;
    check_row(r, n, id_);
    return r;
  }

 private:
  FiniteMeasure lambda_;
  std::string id_;
};

class CompositionKernel final : public Kernel {
 public:
  CompositionKernel(const LevyMeasure& omega, std::string id)
      : Kernel(0.0, omega.x_form()), id_(std::move(id)) {
    if (omega.empty()) throw PreconditionError("composition: the Levy measure is zero");
    omega.x_form().validate();
    double p1 = std::numeric_limits<double>::infinity();
    for (const auto& d : omega.x_form().densities()) p1 = std::min(p1, d.p1);
    gamma_ = (p1 < 0.0 && p1 > -1.0) ? -p1 : 0.0;
  }

  std::string id() const override { return id_; }
  bool absorbing(std::size_t n) const override { return n == 0; }

  double scaling(std::size_t n) const override {
    if (n == 0) return 1.0;
    {
      std::shared_lock lock(z_mutex_);
      auto it = z_.find(n);
      if (it != z_.end()) return it->second;
    }
    return unnormalized(n).second;
  }

  Row compute_row(std::size_t n) const override {
    if (n == 0) return {0, {1.0}};
    auto [p, z] = unnormalized(n);
    for (double& x : p) x /= z;
    Row r{0, std::move(p)};
    check_row(r, n, id_);
    return r;
  }

 private:
  std::pair<std::vector<double>, double> unnormalized(std::size_t n) const {
    const double nd = static_cast<double>(n);
    std::vector<double> p(n);
    CompensatedSum z;
    for (std::size_t k = 0; k < n; ++k) {
      const double kd = static_cast<double>(k);
      p[k] = target_.binomial_moment(log_binomial(nd, kd), kd, nd - kd - 1.0);
      z.add(p[k]);
    }
    std::unique_lock lock(z_mutex_);
    z_.emplace(n, z.value());
    return {std::move(p), z.value()};
  }

  std::string id_;
  mutable std::shared_mutex z_mutex_;
  mutable std::unordered_map<std::size_t, double> z_;
};

class FunctionKernel final : public Kernel {
 public:
  FunctionKernel(std::function<Row(std::size_t)> row_fn, std::function<double(std::size_t)> scaling,
                 double gamma, FiniteMeasure target, std::string id)
      : Kernel(gamma, std::move(target)),
        row_fn_(std::move(row_fn)),
        scaling_(std::move(scaling)),
        id_(std::move(id)) {}

  std::string id() const override { return id_; }
  double scaling(std::size_t n) const override {
    if (n == 0) return 1.0;
    return scaling_ ? scaling_(n) : static_cast<double>(n);
  }
  Row compute_row(std::size_t n) const override {
    Row r = row_fn_(n);
    check_row(r, n, id_);
    return r;
  }

 private:
  std::function<Row(std::size_t)> row_fn_;
  std::function<double(std::size_t)> scaling_;
  std::string id_;
};

class CollapsedKernel final : public Kernel {
 public:
  explicit CollapsedKernel(KernelPtr inner)
      : Kernel(inner->gamma(), inner->target_measure()), inner_(std::move(inner)) {}

  std::string id() const override { return "collapsed{" + inner_->id() + "}"; }
  double scaling(std::size_t n) const override { return inner_->scaling(n); }
  double target_psi(double lambda) const override { return inner_->target_psi(lambda); }
  bool absorbing(std::size_t n) const override { return n == 0 && inner_->absorbing(0); }

  Row compute_row(std::size_t n) const override {
    if (n != 0 && inner_->absorbing(n)) return {0, {1.0}};
    return inner_->compute_row(n);
  }

  std::size_t sample_next(std::size_t n, double u) const override {
    if (n != 0 && inner_->absorbing(n)) return 0;
    return inner_->sample_next(n, u);
  }

 private:
  KernelPtr inner_;
};

}  // namespace

// ---------------------------------------------------------------------------------------

KernelPtr canonical_kernel(const FiniteMeasure& mu, double gamma, double ell, std::string id) {
  return std::make_shared<CanonicalKernel>(mu, gamma, ell, std::move(id));
}

KernelPtr barrier_kernel(const StepDistribution& q) {
  return std::make_shared<BarrierKernel>(q, BarrierMode::kBarrier,
                                         barrier_regime(q, BarrierMode::kBarrier));
}

KernelPtr truncated_kernel(const StepDistribution& q) {
  return std::make_shared<BarrierKernel>(q, BarrierMode::kTruncated,
                                         barrier_regime(q, BarrierMode::kTruncated));
}

KernelPtr ignored_jump_kernel(const StepDistribution& q) {
  return std::make_shared<BarrierKernel>(q, BarrierMode::kIgnored,
                                         barrier_regime(q, BarrierMode::kIgnored));
}

KernelPtr coalescent_kernel(const FiniteMeasure& lambda_measure, std::string id) {
  return std::make_shared<CoalescentKernel>(lambda_measure, std::move(id));
}

KernelPtr composition_kernel(const LevyMeasure& omega, std::string id) {
  return std::make_shared<CompositionKernel>(omega, std::move(id));
}

KernelPtr tabulated_kernel(std::vector<std::vector<double>> rows,
                           std::function<double(std::size_t)> scaling, double gamma,
                           FiniteMeasure target, std::string id) {
  auto table = std::make_shared<const std::vector<std::vector<double>>>(std::move(rows));
  auto fn = [table](std::size_t n) -> Row {
    if (n >= table->size()) throw PreconditionError(fmt::format("tabulated kernel: no row {}", n));
    const auto& row = (*table)[n];
    if (row.size() != n + 1) {
      throw PreconditionError(fmt::format("tabulated kernel: row {} must have {} entries", n, n + 1));
    }
    return {0, row};
  };
  return std::make_shared<FunctionKernel>(fn, std::move(scaling), gamma, std::move(target),
                                          std::move(id));
}

KernelPtr function_kernel(std::function<Row(std::size_t)> row_fn,
                          std::function<double(std::size_t)> scaling, double gamma,
                          FiniteMeasure target, std::string id) {
  return std::make_shared<FunctionKernel>(std::move(row_fn), std::move(scaling), gamma,
                                          std::move(target), std::move(id));
}

KernelPtr collapse_absorbing(KernelPtr kernel) {
  return std::make_shared<CollapsedKernel>(std::move(kernel));
}

// ---------------------------------------------------------------------------------------

CoalescentRates coalescent_rates(const FiniteMeasure& lambda_measure, std::size_t n,
                                 bool force_quadrature) {
  CoalescentRates out;
  out.g.assign(n, 0.0);
  CompensatedSum total;
  const double nd = static_cast<double>(n);
  for (std::size_t k = 1; k < n; ++k) {
    const double kd = static_cast<double>(k);
    out.g[k] = lambda_measure.binomial_moment(log_binomial(nd, kd - 1.0), nd - kd - 1.0, kd - 1.0,
                                              {}, force_quadrature);
    total.add(out.g[k]);
  }
  out.total = total.value();
  return out;
}

double coalescent_h(const FiniteMeasure& lambda_measure, double u) {
  if (!(u > 0.0 && u <= 1.0)) throw DomainError("h: u must lie in (0, 1]");
  return lambda_measure.binomial_moment(0.0, -2.0, 0.0, Interval{u, 1.0, true});
}

double coalescent_beta(const FiniteMeasure& lambda_measure) {
  double beta = 0.0;
  for (const auto& d : lambda_measure.densities()) {
    if (d.p0 < 1.0) beta = std::max(beta, 1.0 - d.p0);
  }
  return beta;
}

FiniteMeasure coalescent_target(const FiniteMeasure& lambda_measure) {
  const double c = std::exp(-log_gamma(2.0 - coalescent_beta(lambda_measure)));
  FiniteMeasure mu;
  for (const auto& a : lambda_measure.atoms()) {
    if (a.x > 0.0) mu = mu + FiniteMeasure::atom(c * a.mass / a.x, 1.0 - a.x);
  }
  for (const auto& d : lambda_measure.densities()) {
    if (!(d.p0 > 0.0)) throw PreconditionError("coalescent target: int x^-1 Lambda(dx) diverges");
    PowerDensity r{c * d.scale, d.p1, d.p0 - 1.0, {}};
    if (d.shape) {
      auto shape = d.shape;
      r.shape = [shape](double y) { return shape(1.0 - y); };
    }
    mu = mu + FiniteMeasure::power_density(std::move(r));
  }
  return mu;
}

double generating_function(const Kernel& kernel, std::size_t n, double lambda) {
  if (n == 0) return 0.0;
  if (!(lambda > 0.0)) throw DomainError("generating_function: lambda must be positive");
  auto r = kernel.row(n);
  const double nd = static_cast<double>(n);
  CompensatedSum s;
  for (std::size_t i = 0; i < r->p.size(); ++i) {
    const std::size_t k = r->lo + i;
    if (k == 0 || r->p[i] == 0.0) continue;
    s.add(std::exp(lambda * std::log(static_cast<double>(k) / nd)) * r->p[i]);
  }
  return s.value();
}

double one_minus_generating_function(const Kernel& kernel, std::size_t n, double lambda) {
  if (n == 0) return 1.0;
  if (!(lambda > 0.0)) throw DomainError("generating_function: lambda must be positive");
  auto r = kernel.row(n);
  const double nd = static_cast<double>(n);
  CompensatedSum s;
  for (std::size_t i = 0; i < r->p.size(); ++i) {
    const std::size_t k = r->lo + i;
    if (r->p[i] == 0.0 || k == n) continue;
    const double w = k == 0 ? 1.0 : -std::expm1(lambda * std::log(static_cast<double>(k) / nd));
    s.add(w * r->p[i]);
  }
  return s.value();
}

bool DiagnosticTable::pass() const {
  return !verdicts.empty() &&
         std::all_of(verdicts.begin(), verdicts.end(), [](const TrendVerdict& v) { return v.pass; });
}

DiagnosticTable hypothesis_h_diagnostic(const Kernel& kernel, std::span<const double> lambda_grid,
                                        std::span<const std::size_t> n_grid, double threshold) {
  DiagnosticTable table;
  table.lambdas.assign(lambda_grid.begin(), lambda_grid.end());
  for (double lambda : lambda_grid) {
    const double target = kernel.target_psi(lambda);
    std::vector<double> errors;
    for (std::size_t n : n_grid) {
      const double value = kernel.scaling(n) * one_minus_generating_function(kernel, n, lambda);
      const double err = target != 0.0 ? std::abs(value - target) / std::abs(target)
                                       : std::numeric_limits<double>::infinity();
      errors.push_back(err);
      table.entries.push_back({n, lambda, value, target, err});
    }
    TrendVerdict v = trend_verdict(errors, threshold);
    if (target == 0.0) {
      v.pass = false;
      v.report = "target psi is zero; relative error undefined";
    }
    table.verdicts.push_back(std::move(v));
  }
  return table;
}

}  // namespace selfsim
