#include "selfsim/exact_dp.hpp"

#include <cmath>
#include <fmt/format.h>
#include <memory>

namespace selfsim {

double MomentTable::normalized(std::size_t n, std::size_t p) const {
  return moment(n, p) / std::pow(scaling.at(n), static_cast<double>(p));
}

void MomentTable::write_csv(std::ostream& out, const std::vector<std::size_t>& states) const {
  out << "n,p,moment,normalized\n";
  for (std::size_t n : states) {
    for (std::size_t p = 0; p <= p_max; ++p) {
      out << fmt::format("{},{},{:.17g},{:.17g}\n", n, p, moment(n, p), normalized(n, p));
    }
  }
}

namespace {
std::vector<std::vector<double>> binomial_table(std::size_t p_max) {
  std::vector<std::vector<double>> c(p_max + 1, std::vector<double>(p_max + 1, 0.0));
  for (std::size_t p = 0; p <= p_max; ++p) {
    c[p][0] = 1.0;
    for (std::size_t j = 1; j <= p; ++j) c[p][j] = c[p - 1][j - 1] + (j <= p - 1 ? c[p - 1][j] : 0.0);
  }
  return c;
}

void require_single_absorbing(const Kernel& kernel, std::size_t n, double leave) {
  if (n >= 1 && !(leave > 0.0)) {
    throw PreconditionError(fmt::format(
        "{}: state {} is absorbing; apply collapse_absorbing so that only 0 absorbs", kernel.id(), n));
  }
}
}  // namespace

MomentTable absorption_moments(const Kernel& kernel, std::size_t n_max, std::size_t p_max) {
  MomentTable t;
  t.kernel_id = kernel.id();
  t.n_max = n_max;
  t.p_max = p_max;
  t.values.assign(n_max + 1, std::vector<double>(p_max + 1, 0.0));
  t.scaling.resize(n_max + 1);
  const auto binom = binomial_table(p_max);
  // shifted[k][p] = E[(1 + A_k)^p]
  std::vector<std::vector<double>> shifted(n_max + 1, std::vector<double>(p_max + 1, 1.0));
  t.values[0][0] = 1.0;
  t.scaling[0] = kernel.scaling(0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const Row row = kernel.compute_row(n);
    t.scaling[n] = kernel.scaling(n);
    CompensatedSum leave_sum;
    for (std::size_t i = 0; i < row.p.size(); ++i) {
      if (row.lo + i != n) leave_sum.add(row.p[i]);
    }
    const double leave = leave_sum.value();
    require_single_absorbing(kernel, n, leave);
    const double stay = row.at(n);
    auto& m = t.values[n];
    m[0] = 1.0;
    for (std::size_t p = 1; p <= p_max; ++p) {
      CompensatedSum rhs;
      for (std::size_t i = 0; i < row.p.size(); ++i) {
        const std::size_t k = row.lo + i;
        if (k == n || row.p[i] == 0.0) continue;
        rhs.add(row.p[i] * shifted[k][p]);
      }
      if (stay > 0.0) {
        CompensatedSum lower;
        for (std::size_t j = 0; j < p; ++j) lower.add(binom[p][j] * m[j]);
        rhs.add(stay * lower.value());
      }
      m[p] = rhs.value() / leave;
    }
    for (std::size_t p = 0; p <= p_max; ++p) {
      CompensatedSum s;
      for (std::size_t j = 0; j <= p; ++j) s.add(binom[p][j] * m[j]);
      shifted[n][p] = s.value();
    }
  }
  return t;
}

namespace {
struct RowCache {
  std::vector<std::shared_ptr<const Row>> rows;
  double entries = 0.0;
};

RowCache load_rows(const Kernel& kernel, std::size_t n) {
  RowCache c;
  c.rows.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    c.rows[i] = kernel.row(i);
    c.entries += static_cast<double>(c.rows[i]->p.size());
  }
  return c;
}

std::vector<double> push_forward(const RowCache& cache, const std::vector<double>& pi) {
  std::vector<CompensatedSum> next(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (pi[i] == 0.0) continue;
    const Row& r = *cache.rows[i];
    for (std::size_t j = 0; j < r.p.size(); ++j) next[r.lo + j].add(pi[i] * r.p[j]);
  }
  std::vector<double> out(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) out[i] = next[i].value();
  return out;
}
}  // namespace

AbsorptionDistribution absorption_distribution(const Kernel& kernel, std::size_t n,
                                               std::size_t k_max) {
  AbsorptionDistribution d;
  if (n == 0) {
    d.pmf = {1.0};
    return d;
  }
  if (k_max == 0) k_max = static_cast<std::size_t>(std::ceil(50.0 * kernel.scaling(n)));
  const RowCache cache = load_rows(kernel, n);
  for (std::size_t i = 1; i <= n; ++i) {
    if (kernel.absorbing(i)) require_single_absorbing(kernel, i, 0.0);
  }
  std::vector<double> pi(n + 1, 0.0);
  pi[n] = 1.0;
  d.pmf.assign(k_max + 1, 0.0);
  for (std::size_t k = 1; k <= k_max; ++k) {
    pi = push_forward(cache, pi);
    d.pmf[k] = pi[0];
    pi[0] = 0.0;
  }
  CompensatedSum tail;
  for (double x : pi) tail.add(x);
  d.tail = tail.value();
  return d;
}

std::vector<double> state_distribution(const Kernel& kernel, std::size_t n, std::size_t k,
                                       double cost_budget) {
  const RowCache cache = load_rows(kernel, n);
  if (static_cast<double>(k) * cache.entries > cost_budget) {
    throw PreconditionError(fmt::format("state_distribution: {} steps over {} row entries exceeds the budget {:.3g}",
                                        k, cache.entries, cost_budget));
  }
  std::vector<double> pi(n + 1, 0.0);
  pi[n] = 1.0;
  for (std::size_t s = 0; s < k; ++s) pi = push_forward(cache, pi);
  return pi;
}

double marginal_moment(const Kernel& kernel, std::size_t n, double t, double lambda,
                       double cost_budget) {
  if (!(t >= 0.0)) throw DomainError("marginal_moment: t must be >= 0");
  if (!(lambda > 0.0)) throw DomainError("marginal_moment: lambda must be positive");
  if (n == 0) return 0.0;
  const auto steps = static_cast<std::size_t>(std::floor(kernel.scaling(n) * t));
  const auto pi = state_distribution(kernel, n, steps, cost_budget);
  const double nd = static_cast<double>(n);
  CompensatedSum s;
  for (std::size_t i = 1; i <= n; ++i) {
    if (pi[i] != 0.0) s.add(pi[i] * std::exp(lambda * std::log(static_cast<double>(i) / nd)));
  }
  return s.value();
}

}  // namespace selfsim
