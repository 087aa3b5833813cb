#include "selfsim/chain.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace selfsim {

ChainPath sample_path(const Kernel& kernel, std::size_t n, Stream& rng, std::size_t step_cap) {
  ChainPath path;
  path.n = n;
  path.seed = rng.seed();
  path.stream = rng.id();
  path.kernel_id = kernel.id();
  path.states.push_back(n);
  std::size_t x = n;
  while (!kernel.absorbing(x)) {
    if (path.states.size() > step_cap) {
      throw Error(fmt::format("sample_path: no absorption after {} steps from {} ({})", step_cap, n,
                              kernel.id()));
    }
    x = kernel.sample_next(x, rng.uniform());
    path.states.push_back(x);
  }
  return path;
}

namespace {
StepFunction y_function(const ChainPath& path, double a_n) {
  if (path.n == 0) return {{0.0}, {0.0}};
  StepFunction f;
  const double n = static_cast<double>(path.n);
  for (std::size_t i = 0; i < path.states.size(); ++i) {
    f.breaks.push_back(static_cast<double>(i) / a_n);
    f.values.push_back(static_cast<double>(path.states[i]) / n);
  }
  return f;
}
}  // namespace

RescaledPath::RescaledPath(const ChainPath& path, double a_n, double gamma)
    : path_(path), a_n_(a_n), tc_(y_function(path, a_n), gamma) {
  if (!(a_n > 0.0)) throw DomainError("rescale: a_n must be positive");
}

std::size_t RescaledPath::step_at(double t) const {
  return std::min(tc_.g().segment(t), path_.absorption_time());
}

double RescaledPath::T_eps(double eps) const {
  const auto& g = tc_.g();
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (g.values[i] <= eps) return g.breaks[i];
  }
  return std::numeric_limits<double>::infinity();
}

double RescaledPath::absorption_integral() const {
  const auto& g = tc_.g();
  const std::size_t A = path_.absorption_time();
  CompensatedSum s;
  for (std::size_t i = 0; i < A && i + 1 < g.values.size(); ++i) {
    s.add(std::pow(g.values[i], tc_.gamma()) * (g.breaks[i + 1] - g.breaks[i]));
  }
  return s.value();
}

RescaledPath rescale(const ChainPath& path, double a_n, double gamma) {
  return RescaledPath(path, a_n, gamma);
}

RescaledPath rescale(const ChainPath& path, const Kernel& kernel) {
  return RescaledPath(path, kernel.scaling(path.n), kernel.gamma());
}

GeneratingTable GeneratingTable::build(const Kernel& kernel, std::size_t n_max, double lambda) {
  GeneratingTable t;
  t.lambda = lambda;
  t.g.resize(n_max + 1);
  t.one_minus_g.resize(n_max + 1);
  for (std::size_t j = 0; j <= n_max; ++j) {
    t.g[j] = generating_function(kernel, j, lambda);
    t.one_minus_g[j] = one_minus_generating_function(kernel, j, lambda);
  }
  return t;
}

namespace {
MartingaleValue product_martingale(const ChainPath& path, const GeneratingTable& table,
                                   std::size_t k, double log_bound) {
  const std::size_t xk = path.at(k);
  if (xk == 0) return {0.0, false};
  k = std::min(k, path.absorption_time());
  CompensatedSum log_value;
  log_value.add(table.lambda * std::log(static_cast<double>(xk) / static_cast<double>(path.n)));
  for (std::size_t i = 0; i < k; ++i) log_value.add(-std::log(table.g.at(path.states[i])));
  const double lv = log_value.value();
  if (lv > log_bound) return {std::exp(log_bound), true};
  return {std::exp(lv), false};
}
}  // namespace

MartingaleValue martingale_upsilon(const ChainPath& path, const GeneratingTable& table,
                                   std::size_t k, double log_bound) {
  return product_martingale(path, table, k, log_bound);
}

double additive_martingale(const ChainPath& path, const GeneratingTable& table, std::size_t k) {
  const double n = static_cast<double>(path.n);
  auto power = [&](std::size_t x) {
    return x == 0 ? 0.0 : std::exp(table.lambda * std::log(static_cast<double>(x) / n));
  };
  k = std::min(k, path.absorption_time());
  CompensatedSum s;
  s.add(power(path.states[k]));
  for (std::size_t i = 0; i < k; ++i) s.add(power(path.states[i]) * table.one_minus_g.at(path.states[i]));
  return s.value();
}

MartingaleValue martingale_M(const RescaledPath& rescaled, const GeneratingTable& table, double t,
                             double eps, double log_bound) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("martingale_M: eps must lie in (0, 1)");
  if (!(t >= 0.0)) throw DomainError("martingale_M: t must be >= 0");
  const double s = std::min(t, rescaled.T_eps(eps));
  return product_martingale(rescaled.path(), table, rescaled.step_at(s), log_bound);
}

CoupledTriple coupled_barrier_triple(const StepDistribution& q, std::size_t n, Stream& rng,
                                     std::size_t step_cap) {
  CoupledTriple c;
  c.tilde.push_back(n);
  c.x.push_back(n);
  c.hat.push_back(n);
  c.acceptance.push_back(0);
  std::size_t hat = n;
  std::size_t tilde = n;
  std::size_t walk = 0;  // S_k, saturated at n
  std::size_t i = 0;
  while (hat > 0) {
    if (++i > step_cap) throw Error("coupled_barrier_triple: step cap exceeded");
    const std::size_t zeta = q.quantile(rng.uniform(), n);  // n + 1 stands for "more than n"
    if (tilde > 0) {
      walk = std::min(n, walk + zeta);
      tilde = n - walk;
      c.tilde.push_back(tilde);
    }
    if (zeta <= hat) {
      hat -= zeta;
      c.x.push_back(hat);
      c.acceptance.push_back(i);
    }
    c.hat.push_back(hat);
  }
  return c;
}

Composition composition_from_path(const ChainPath& path) {
  if (path.states.back() != 0) throw PreconditionError("composition: path is not absorbed at 0");
  Composition c;
  for (std::size_t i = 1; i < path.states.size(); ++i) {
    const std::size_t part = path.states[i - 1] - path.states[i];
    if (part == 0) throw PreconditionError("composition: the chain stayed put, so a part would be 0");
    c.parts.push_back(part);
  }
  return c;
}

}  // namespace selfsim
