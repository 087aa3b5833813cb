#include "selfsim/suites.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "selfsim/chain.hpp"
#include "selfsim/exact_dp.hpp"
#include "selfsim/limit_process.hpp"
#include "selfsim/parallel.hpp"
#include "selfsim/stats.hpp"
#include "selfsim/time_change.hpp"

#ifndef SELFSIM_VERSION
#define SELFSIM_VERSION "0.0.0"
#endif

namespace selfsim {

using json = nlohmann::ordered_json;

namespace {

std::string cell(double v) { return fmt::format("{}", v); }
std::string cell(std::size_t v) { return std::to_string(v); }

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + sep) {
    if (c == sep) {
      const auto a = cur.find_first_not_of(" \t");
      if (a != std::string::npos) out.push_back(cur.substr(a, cur.find_last_not_of(" \t") - a + 1));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

// Streams of one suite are (seed, tag * 2^32 + replicate), so different uses never overlap.
Stream stream_for(const ExperimentConfig& cfg, std::uint64_t tag, std::uint64_t i) {
  return Stream(*cfg.seed, (tag << 32) + i);
}

json estimate_json(const EstimateWithError& e, double target) {
  json j;
  j["value"] = e.value;
  j["se"] = e.se;
  j["count"] = e.count;
  j["target"] = target;
  j["z"] = e.z_score(target);
  return j;
}

Verdict within_se(const std::string& name, const EstimateWithError& e, double target, double k = 4.0) {
  return {name, e.within(target, k),
          fmt::format("estimate {:.6g} +- {:.3g} (se), target {:.6g}, z = {:.2f}", e.value, e.se, target,
                      e.z_score(target))};
}

Verdict trend(const std::string& name, const TrendVerdict& v) { return {name, v.pass, v.report}; }

double psi_of(const Kernel& k, double lambda) { return k.target_psi(lambda); }

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t c) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

// ---------------------------------------------------------------------------------------

void moment_limit(const ExperimentConfig& cfg, SuiteResult& res) {
  const ParsedKernel pk = parse_kernel(cfg.kernel);
  const KernelPtr k = collapse_absorbing(pk.kernel);
  const std::size_t p_max = cfg.get_size("p_max", 2);
  const double threshold = cfg.get_double("threshold", 0.10);
  const MomentTable tab = absorption_moments(*k, cfg.n_grid.back(), p_max);
  const auto targets = analytic_moments([&](double l) { return psi_of(*pk.kernel, l); }, pk.kernel->gamma(), p_max);
  Table t{"moment_limit", {"n", "p", "moment", "normalized", "target", "rel_error"}, {}};
  res.estimates["targets"] = targets;
  for (std::size_t p = 1; p <= p_max; ++p) {
    std::vector<double> errors, values;
    for (std::size_t n : cfg.n_grid) {
      const double v = tab.normalized(n, p);
      values.push_back(v);
      errors.push_back(std::abs(v / targets[p] - 1.0));
      t.rows.push_back({cell(n), cell(p), cell(tab.moment(n, p)), cell(v), cell(targets[p]), cell(errors.back())});
    }
    res.estimates[fmt::format("normalized_p{}", p)] = values;
    res.verdicts.push_back(trend(fmt::format("E[A_n^{}]/a_n^{} trend", p, p), trend_verdict(errors, threshold)));
  }
  res.tables.push_back(std::move(t));
}

void finite_mean(const ExperimentConfig& cfg, SuiteResult& res) {
  const ParsedKernel pk = parse_kernel(cfg.kernel);
  if (!pk.steps || !pk.steps->finite_mean()) throw PreconditionError("finite-mean: kernel needs a step law with finite mean");
  const KernelPtr k = collapse_absorbing(pk.kernel);
  const std::size_t n = cfg.n_grid.back();
  const double tol = cfg.get_double("tolerance", 0.05);
  const double m = pk.steps->mean();
  const MomentTable tab = absorption_moments(*k, n, 1);
  const double target = 1.0 / m;
  const double v = tab.normalized(n, 1);
  res.estimates["n"] = n;
  res.estimates["mean_step"] = m;
  res.estimates["E[A_n]/n"] = v;
  res.verdicts.push_back({"E[A_n]/a_n within band", std::abs(v - target) <= tol * target,
                          fmt::format("E[A_n]/a_n = {:.6f}, target 1/m = {:.6f}, band {}", v, target, tol)});
  Table t{"finite_mean_marginal", {"n", "t", "E[Y_n(t)]", "limit"}, {}};
  for (double time : cfg.t_grid) {
    const double e = marginal_moment(*k, n, time, 1.0);
    const double limit = std::max(0.0, 1.0 - m * time);
    t.rows.push_back({cell(n), cell(time), cell(e), cell(limit)});
    res.estimates[fmt::format("E[Y_n({})]", time)] = e;
    res.verdicts.push_back({fmt::format("E[Y_n({})] near (1 - m t)", time), std::abs(e - limit) <= tol,
                            fmt::format("exact {:.6f}, limit {:.6f}, tolerance {}", e, limit, tol)});
  }
  res.tables.push_back(std::move(t));
}

void coalescent_suite(const ExperimentConfig& cfg, SuiteResult& res) {
  const ParsedKernel pk = parse_kernel(cfg.kernel);
  if (pk.family != "coalescent") throw PreconditionError("coalescent suite: kernel must be coalescent{...}");
  const FiniteMeasure& lambda = pk.measure;
  const double beta = coalescent_beta(lambda);
  const double threshold = cfg.get_double("threshold", 0.02);
  Table t{"coalescent_gn", {"n", "g_n", "h(1/n)", "ratio"}, {}};
  std::vector<double> errors;
  for (std::size_t n : cfg.n_grid) {
    const double gn = coalescent_rates(lambda, n).total;
    const double h = coalescent_h(lambda, 1.0 / static_cast<double>(n));
    const double ratio = gn / (std::tgamma(2.0 - beta) * h);
    errors.push_back(std::abs(ratio - 1.0));
    t.rows.push_back({cell(n), cell(gn), cell(h), cell(ratio)});
  }
  res.tables.push_back(std::move(t));
  res.estimates["beta"] = beta;
  res.estimates["g_n_rel_errors"] = errors;
  res.verdicts.push_back(trend("g_n / (Gamma(2-beta) h(1/n)) trend", trend_verdict(errors, threshold)));

  const std::size_t n = cfg.get_size("mc_n", 5000);
  const Kernel& k = *pk.kernel;
  const double a_n = k.scaling(n);
  const auto samples = run_replicates(cfg.replicates, cfg.threads, [&](std::size_t i) {
    Stream rng = stream_for(cfg, 1, i);
    return static_cast<double>(sample_path(k, n, rng).absorption_time()) / a_n;
  });
  const double target = 1.0 / k.target_psi(k.gamma());
  const auto e = empirical_moment(samples, 1.0);
  res.estimates["mc_n"] = n;
  res.estimates["a_n"] = a_n;
  res.estimates["A_n/a_n"] = estimate_json(e, target);
  // exact value at the same n; the collapsed chain takes one extra step from 1 to 0
  const MomentTable dp = absorption_moments(*collapse_absorbing(pk.kernel), n, 1);
  const double exact = (dp.moment(n, 1) - 1.0) / a_n;
  res.estimates["dp_A_n/a_n"] = exact;
  res.verdicts.push_back(within_se(fmt::format("MC E[A_n]/h(1/n) at n = {} vs limit 1/psi(beta)", n), e, target));
  res.verdicts.push_back(within_se(fmt::format("MC E[A_n]/h(1/n) at n = {} vs exact DP", n), e, exact));
}

void subordinator_marginal(const ExperimentConfig& cfg, SuiteResult& res) {
  const std::string list = cfg.get_string("measures", "barrier(0.5)");
  const double horizon = cfg.t_grid.back() > 0.0 ? cfg.t_grid.back() : 1.0;
  Table t{"subordinator_marginal", {"measure", "t", "lambda", "mean", "se", "target"}, {}};
  std::uint64_t tag = 0;
  for (const std::string& text : split_list(list, ';')) {
    const FiniteMeasure mu = parse_measure(text);
    const SubordinatorSampler sampler(levy_triple(mu), horizon);
    const std::size_t cells = cfg.t_grid.size() * cfg.lambda_grid.size();
    const auto rows = run_replicates(cfg.replicates, cfg.threads, [&](std::size_t i) {
      Stream rng = stream_for(cfg, tag, i);
      const SubordinatorPath path = sampler.sample(rng);
      std::vector<double> v;
      v.reserve(cells);
      for (double time : cfg.t_grid) {
        const double xi = path.xi(time);
        for (double l : cfg.lambda_grid) v.push_back(std::isfinite(xi) ? std::exp(-l * xi) : 0.0);
      }
      return v;
    });
    ++tag;
    std::size_t c = 0;
    for (double time : cfg.t_grid) {
      for (double l : cfg.lambda_grid) {
        const auto e = empirical_moment(column(rows, c++), 1.0);
        const double target = std::exp(-laplace_exponent(mu, l) * time);
        t.rows.push_back({text, cell(time), cell(l), cell(e.value), cell(e.se), cell(target)});
        res.estimates[fmt::format("{} t={} lambda={}", text, time, l)] = estimate_json(e, target);
        res.verdicts.push_back(within_se(fmt::format("E[Z({})^{}] for {}", time, l, text), e, target));
      }
    }
    res.estimates[fmt::format("{} eps_cut", text)] = sampler.eps_cut();
  }
  res.tables.push_back(std::move(t));
}

struct LimitDraws {
  std::vector<double> I;
  std::vector<double> sigma;
  std::size_t short_horizon = 0;
};

LimitDraws draw_limits(const ExperimentConfig& cfg, const FiniteMeasure& mu, double gamma, std::uint64_t tag,
                       SuiteResult* records) {
  const double psi_gamma = laplace_exponent(mu, gamma);
  const SubordinatorSampler sampler(levy_triple(mu), cfg.get_double("horizon", 10.0));
  const auto samples = run_replicates(cfg.replicates, cfg.threads, [&](std::size_t i) {
    Stream rng = stream_for(cfg, tag, i);
    return sample_limit(sampler, gamma, psi_gamma, rng);
  });
  LimitDraws d;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const LimitSample& s = samples[i];
    d.I.push_back(s.I);
    d.sigma.push_back(s.sigma);
    if (!s.horizon_ok) ++d.short_horizon;
    if (records) {
      json r;
      r["type"] = "limit_sample";
      r["gamma"] = gamma;
      r["stream"] = (tag << 32) + i;
      r["I"] = s.I;
      r["sigma"] = s.sigma;
      r["killing_time"] = std::isfinite(s.killing_time) ? json(s.killing_time) : json(nullptr);
      r["eps_cut"] = sampler.eps_cut();
      r["neglected_variance"] = sampler.neglected_variance();
      records->replicate_records.push_back(std::move(r));
    }
  }
  return d;
}

void limit_checks(const ExperimentConfig& cfg, SuiteResult& res, const FiniteMeasure& mu, double gamma,
                  bool keep_records) {
  const LimitDraws d = draw_limits(cfg, mu, gamma, 7, keep_records ? &res : nullptr);
  const auto targets = analytic_moments(mu, gamma, 2);
  double worst = 0.0;
  for (std::size_t i = 0; i < d.I.size(); ++i) worst = std::max(worst, std::abs(d.sigma[i] - d.I[i]) / d.I[i]);
  for (std::size_t p = 1; p <= 2; ++p) {
    const auto e = empirical_moment(d.I, static_cast<double>(p));
    res.estimates[fmt::format("E[I^{}]", p)] = estimate_json(e, targets[p]);
    res.verdicts.push_back(within_se(fmt::format("MC E[I^{}] vs p!/prod psi(gamma i)", p), e, targets[p]));
  }
  res.estimates["max_rel_sigma_minus_I"] = worst;
  res.estimates["horizon_insufficient"] = d.short_horizon;
  res.verdicts.push_back({"sigma = I on every path", worst <= 1e-12,
                          fmt::format("max relative difference {:.3g}", worst)});
}

void exponential_functional(const ExperimentConfig& cfg, SuiteResult& res) {
  const ParsedKernel pk = parse_kernel(cfg.kernel);
  const Kernel& k = *pk.kernel;
  limit_checks(cfg, res, k.target_measure(), k.gamma(), false);
  const double threshold = cfg.get_double("threshold", 0.10);
  const std::size_t n = cfg.n_grid.back();
  const MomentTable tab = absorption_moments(*collapse_absorbing(pk.kernel), n, 2);
  const auto targets = analytic_moments(k.target_measure(), k.gamma(), 2);
  for (std::size_t p = 1; p <= 2; ++p) {
    const double v = tab.normalized(n, p);
    const double mc = res.estimates[fmt::format("E[I^{}]", p)]["value"].get<double>();
    const double rel = std::abs(v / targets[p] - 1.0);
    res.estimates[fmt::format("dp_normalized_p{}", p)] = v;
    res.verdicts.push_back({fmt::format("DP E[A_n^{}]/a_n^{} at n = {} vs limit", p, p, n), rel < threshold,
                            fmt::format("DP {:.6f}, MC {:.6f}, analytic {:.6f}, DP relative error {:.4f}", v, mc,
                                        targets[p], rel)});
  }
}

void simulate_limit(const ExperimentConfig& cfg, SuiteResult& res) {
  FiniteMeasure mu;
  double gamma = 0.0;
  const std::string text = cfg.get_string("measure", "");
  if (!text.empty()) {
    mu = parse_measure(text);
    if (!cfg.gamma) throw ConfigError("simulate-limit: field 'gamma' is required with 'measure'");
    gamma = *cfg.gamma;
  } else {
    const ParsedKernel pk = parse_kernel(cfg.kernel);
    mu = pk.kernel->target_measure();
    gamma = cfg.gamma.value_or(pk.kernel->gamma());
  }
  limit_checks(cfg, res, mu, gamma, true);
}

void martingales(const ExperimentConfig& cfg, SuiteResult& res) {
  const ParsedKernel pk = parse_kernel(cfg.kernel);
  const Kernel& k = *pk.kernel;
  const std::size_t n = cfg.n_grid.front();
  const double eps = cfg.get_double("eps", 0.1);
  std::vector<std::size_t> steps;
  for (double s : cfg.get_doubles("steps", {1, 10, 40})) steps.push_back(static_cast<std::size_t>(s));
  for (double lambda : cfg.lambda_grid) {
    const GeneratingTable table = GeneratingTable::build(k, n, lambda);
    const std::size_t cols = 2 * steps.size() + cfg.t_grid.size();
    const auto rows = run_replicates(cfg.replicates, cfg.threads, [&](std::size_t i) {
      Stream rng = stream_for(cfg, 0, i);
      const ChainPath path = sample_path(k, n, rng);
      std::vector<double> v;
      v.reserve(cols + 1);
      double overflow = 0.0;
      for (std::size_t s : steps) {
        const std::size_t kk = std::min(s, path.absorption_time());
        const MartingaleValue u = martingale_upsilon(path, table, kk);
        overflow += u.overflow;
        v.push_back(u.value);
        v.push_back(additive_martingale(path, table, kk));
      }
      const RescaledPath rp = rescale(path, k);
      for (double t : cfg.t_grid) {
        const MartingaleValue m = martingale_M(rp, table, t, eps);
        overflow += m.overflow;
        v.push_back(m.value);
      }
      v.push_back(overflow);
      return v;
    });
    double overflows = 0.0;
    for (const auto& r : rows) overflows += r.back();
    std::size_t c = 0;
    for (std::size_t s : steps) {
      const auto u = empirical_moment(column(rows, c++), 1.0);
      const auto a = empirical_moment(column(rows, c++), 1.0);
      res.estimates[fmt::format("lambda={} Upsilon(k={})", lambda, s)] = estimate_json(u, 1.0);
      res.estimates[fmt::format("lambda={} additive(k={})", lambda, s)] = estimate_json(a, 1.0);
      res.verdicts.push_back(within_se(fmt::format("E[Upsilon_n({})] = 1, lambda = {}", s, lambda), u, 1.0));
      res.verdicts.push_back(within_se(fmt::format("E[additive({})] = 1, lambda = {}", s, lambda), a, 1.0));
    }
    for (double t : cfg.t_grid) {
      const auto col = column(rows, c++);
      const auto m = empirical_moment(col, 1.0);
      json j = estimate_json(m, 1.0);
      j["max"] = *std::max_element(col.begin(), col.end());
      res.estimates[fmt::format("lambda={} M(t={} ^ T_eps)", lambda, t)] = j;
      res.verdicts.push_back(within_se(fmt::format("E[M_n({} ^ T_eps)] = 1, lambda = {}, eps = {}", t, lambda, eps), m, 1.0));
    }
    res.estimates[fmt::format("lambda={} overflows", lambda)] = overflows;
    res.verdicts.push_back({fmt::format("no log-product overflow, lambda = {}", lambda), overflows == 0.0,
                            fmt::format("{} overflowing evaluations", overflows)});
  }
}

void coupling(const ExperimentConfig& cfg, SuiteResult& res) {
  const ParsedKernel pk = parse_kernel(cfg.kernel);
  if (!pk.steps) throw PreconditionError("coupling: kernel must be barrier{q}, truncated{q} or ignored{q}");
  const StepDistribution q = *pk.steps;
  const std::size_t n = cfg.n_grid.front();
  const auto rows = run_replicates(cfg.replicates, cfg.threads, [&](std::size_t i) {
    Stream rng = stream_for(cfg, 0, i);
    const CoupledTriple c = coupled_barrier_triple(q, n, rng);
    std::array<std::size_t, 3> bad{0, 0, 0};
    const std::size_t len = std::max({c.tilde.size(), c.x.size(), c.hat.size()});
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t t = CoupledTriple::at(c.tilde, k), x = CoupledTriple::at(c.x, k),
                        h = CoupledTriple::at(c.hat, k);
      if (!(t <= x && x <= h)) ++bad[0];
      if (k + 1 < c.tilde.size() && !(t == x && x == h)) ++bad[1];
    }
    for (std::size_t k = 0; k < c.x.size(); ++k) {
      if (k >= c.acceptance.size() || c.x[k] != CoupledTriple::at(c.hat, c.acceptance[k])) ++bad[2];
    }
    return bad;
  });
  std::array<std::size_t, 3> total{0, 0, 0};
  for (const auto& r : rows) {
    for (int j = 0; j < 3; ++j) total[j] += r[j];
  }
  const char* names[3] = {"tilde X <= X <= hat X", "all equal before the truncated absorption",
                          "X(k) = hat X(T_k)"};
  for (int j = 0; j < 3; ++j) {
    res.estimates[names[j]] = total[j];
    res.verdicts.push_back({names[j], total[j] == 0, fmt::format("{} violations over {} triples", total[j], rows.size())});
  }
}

void composition_suite(const ExperimentConfig& cfg, SuiteResult& res) {
  const ParsedKernel pk = parse_kernel(cfg.kernel);
  if (pk.family != "composition") throw PreconditionError("composition suite: kernel must be composition{...}");
  const Kernel& k = *pk.kernel;
  LevyTriple triple;
  triple.levy = LevyMeasure::from_measure(pk.measure);
  const SubordinatorSampler sampler(triple, cfg.get_double("horizon", 1.0));
  Table t{"composition_laws", {"n", "law", "value", "empirical", "exact", "se"}, {}};
  std::uint64_t tag = 0;
  std::size_t insufficient = 0;
  for (std::size_t n : cfg.n_grid) {
    const auto comps = run_replicates(cfg.replicates, cfg.threads, [&](std::size_t i) {
      Stream rng = stream_for(cfg, tag, i);
      return balls_in_gaps(sampler, n, rng);
    });
    ++tag;
    const double N = static_cast<double>(comps.size());
    std::vector<double> count_k(n + 1, 0.0), count_c1(n + 1, 0.0);
    for (const auto& g : comps) {
      insufficient += g.insufficient;
      count_k[std::min(g.composition.length(), n)] += 1.0;
      if (!g.composition.parts.empty()) count_c1[std::min(g.composition.parts.front(), n)] += 1.0;
    }
    const AbsorptionDistribution kd = absorption_distribution(k, n, n);
    for (int law = 0; law < 2; ++law) {
      double worst = 0.0;
      bool ok = true;
      for (std::size_t v = 1; v <= n; ++v) {
        const double exact = law == 0 ? kd.pmf[v] : k.prob(n, n - v);
        const double emp = (law == 0 ? count_k[v] : count_c1[v]) / N;
        const double se = std::sqrt(exact * (1.0 - exact) / N);
        const double z = se > 0.0 ? (emp - exact) / se : (emp == exact ? 0.0 : INFINITY);
        worst = std::max(worst, std::abs(z));
        ok = ok && std::abs(z) <= 4.0;
        t.rows.push_back({cell(n), law == 0 ? "K" : "C1", cell(v), cell(emp), cell(exact), cell(se)});
      }
      res.verdicts.push_back({fmt::format("{} law at n = {}", law == 0 ? "block count K" : "first part C1", n), ok,
                              fmt::format("largest |z| over cells {:.2f}", worst)});
    }
    if (n == cfg.n_grid.back()) {
      // regenerative property: P(C1 = c1, C2 = c2) = p_{n, n-c1} p_{n-c1, n-c1-c2}
      std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
      std::vector<double> probs;
      for (std::size_t c1 = 1; c1 <= n; ++c1) {
        const double p1 = k.prob(n, n - c1);
        if (c1 == n) {
          index[{c1, 0}] = probs.size();
          probs.push_back(p1);
          continue;
        }
        for (std::size_t c2 = 1; c2 <= n - c1; ++c2) {
          index[{c1, c2}] = probs.size();
          probs.push_back(p1 * k.prob(n - c1, n - c1 - c2));
        }
      }
      std::vector<double> observed(probs.size(), 0.0);
      for (const auto& g : comps) {
        const auto& parts = g.composition.parts;
        const std::size_t c1 = parts.front();
        const std::size_t c2 = parts.size() > 1 ? parts[1] : 0;
        const auto it = index.find({c1, c2});
        if (it != index.end()) observed[it->second] += 1.0;
      }
      const ChiSquareResult chi = chi_square_gof(observed, probs);
      res.estimates[fmt::format("chi2 n={}", n)] = {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value}};
      res.verdicts.push_back({fmt::format("regenerative (C1, C2) law at n = {}, chi-square 1%", n), chi.p_value >= 0.01,
                              fmt::format("statistic {:.3f} on {} dof, p = {:.4f}", chi.statistic, chi.dof, chi.p_value)});
    }
  }
  res.estimates["insufficient_paths"] = insufficient;
  res.tables.push_back(std::move(t));
}

void h_diagnostic(const ExperimentConfig& cfg, SuiteResult& res) {
  std::vector<std::pair<std::string, double>> list;
  if (!cfg.kernel.empty()) {
    list.emplace_back(cfg.kernel, cfg.get_double("threshold", 0.05));
  } else {
    for (const std::string& item : split_list(cfg.get_string("kernels", ""), ';')) {
      const auto at = item.rfind('@');
      if (at == std::string::npos) {
        list.emplace_back(item, cfg.get_double("threshold", 0.05));
      } else {
        list.emplace_back(split_list(item.substr(0, at), ';').at(0), std::stod(item.substr(at + 1)));
      }
    }
  }
  Table t{"h_diagnostic", {"kernel", "n", "lambda", "value", "target", "rel_error"}, {}};
  for (const auto& [text, threshold] : list) {
    const ParsedKernel pk = parse_kernel(text);
    const DiagnosticTable d = hypothesis_h_diagnostic(*pk.kernel, cfg.lambda_grid, cfg.n_grid, threshold);
    for (const auto& e : d.entries) {
      t.rows.push_back({text, cell(e.n), cell(e.lambda), cell(e.value), cell(e.target), cell(e.rel_error)});
    }
    for (std::size_t i = 0; i < d.lambdas.size(); ++i) {
      res.verdicts.push_back(trend(fmt::format("{} lambda = {} (threshold {})", text, d.lambdas[i], threshold),
                                   d.verdicts[i]));
      res.estimates[fmt::format("{} lambda={} final_error", text, d.lambdas[i])] = d.verdicts[i].final_error;
    }
  }
  res.tables.push_back(std::move(t));
}

void marginal_ks(const ExperimentConfig& cfg, SuiteResult& res) {
  const ParsedKernel pk = parse_kernel(cfg.kernel);
  const Kernel& k = *pk.kernel;
  const FiniteMeasure& mu = k.target_measure();
  const double gamma = k.gamma();
  const double threshold = cfg.get_double("threshold", 0.05);
  const SubordinatorSampler sampler(levy_triple(mu), cfg.get_double("horizon", 10.0));
  const double psi_gamma = laplace_exponent(mu, gamma);
  const auto limit_rows = run_replicates(cfg.replicates, cfg.threads, [&](std::size_t i) {
    Stream rng = stream_for(cfg, 1, i);
    const LimitSample s = sample_limit(sampler, gamma, psi_gamma, rng);
    std::vector<double> v;
    for (double time : cfg.t_grid) v.push_back(s.Y(time));
    return v;
  });
  std::vector<std::vector<double>> ks(cfg.t_grid.size());
  Table t{"marginal_ks", {"n", "t", "ks", "mean_Y_n", "mean_Y"}, {}};
  for (std::size_t n : cfg.n_grid) {
    const double a_n = k.scaling(n);
    const auto chain_rows = run_replicates(cfg.replicates, cfg.threads, [&](std::size_t i) {
      Stream rng = stream_for(cfg, 2, i);
      const ChainPath path = sample_path(k, n, rng);
      std::vector<double> v;
      for (double time : cfg.t_grid) {
        const auto step = static_cast<std::size_t>(std::floor(a_n * time));
        v.push_back(static_cast<double>(path.at(step)) / static_cast<double>(n));
      }
      return v;
    });
    for (std::size_t j = 0; j < cfg.t_grid.size(); ++j) {
      const auto a = column(chain_rows, j);
      const auto b = column(limit_rows, j);
      const double d = ks_distance(a, b);
      ks[j].push_back(d);
      t.rows.push_back({cell(n), cell(cfg.t_grid[j]), cell(d), cell(empirical_moment(a, 1.0).value),
                        cell(empirical_moment(b, 1.0).value)});
    }
  }
  for (std::size_t j = 0; j < cfg.t_grid.size(); ++j) {
    res.estimates[fmt::format("ks t={}", cfg.t_grid[j])] = ks[j];
    res.verdicts.push_back(trend(fmt::format("KS(Y_n({0}), Y({0})) decreasing in n", cfg.t_grid[j]),
                                 trend_verdict(ks[j], threshold)));
  }
  res.tables.push_back(std::move(t));
}

void time_change_suite(const ExperimentConfig& cfg, SuiteResult& res) {
  constexpr double kDelta = 1e-4;
  struct Out {
    double round_trip = 0.0, sigma = 0.0, brute = 0.0;
  };
  const auto rows = run_replicates(cfg.replicates, cfg.threads, [&](std::size_t i) {
    Stream rng = stream_for(cfg, 0, i);
    StepFunction f;
    const std::size_t levels = 1 + static_cast<std::size_t>(rng.uniform() * 7.0);
    double b = 0.0, v = 0.3 + 0.7 * rng.uniform();
    for (std::size_t j = 0; j < levels; ++j) {
      f.breaks.push_back(b);
      f.values.push_back(v);
      b += 0.05 + 0.5 * rng.uniform();
      v *= 0.2 + 0.8 * rng.uniform();
    }
    const bool dies = rng.uniform() < 0.5;
    if (dies) {
      f.breaks.push_back(b);
      f.values.push_back(0.0);
    }
    const double gamma = 0.2 + 1.8 * rng.uniform();
    const TimeChange tc(f, gamma);
    Out o;
    // clock horizon: up to the first zero of g, or the image of the last break
    const double end_real = dies ? b : b + 0.5;
    const double s_end = dies ? tc.sigma_g() : tc.tau(end_real);
    std::vector<double> queries;
    for (int q = 0; q < 8; ++q) queries.push_back(rng.uniform() * s_end);
    std::sort(queries.begin(), queries.end());
    for (double s : queries) o.round_trip = std::max(o.round_trip, std::abs(tc.tau(tc.tau_inv(s)) - s) / std::max(1.0, s));
    if (dies) o.sigma = std::abs(tc.sigma_f() - tc.integral_g_gamma()) / std::max(1.0, tc.sigma_f());
    // brute force: midpoint Riemann sums of f^-gamma, marched until they pass each query
    double u = 0.0, acc = 0.0;
    std::size_t q = 0;
    while (q < queries.size() && u < end_real + 1.0) {
      const double inc = std::pow(f(u + 0.5 * kDelta), -gamma) * kDelta;
      while (q < queries.size() && acc + inc > queries[q]) {
        o.brute = std::max(o.brute, std::abs(u + kDelta - tc.tau_inv(queries[q])));
        ++q;
      }
      acc += inc;
      u += kDelta;
    }
    return o;
  });
  double rt = 0.0, sg = 0.0, bf = 0.0;
  for (const auto& o : rows) {
    rt = std::max(rt, o.round_trip);
    sg = std::max(sg, o.sigma);
    bf = std::max(bf, o.brute);
  }
  res.estimates["max_round_trip_error"] = rt;
  res.estimates["max_sigma_error"] = sg;
  res.estimates["max_brute_force_gap"] = bf;
  res.verdicts.push_back({"tau_f(tau_f_inv(s)) = s", rt <= 1e-12, fmt::format("max relative error {:.3g}", rt)});
  res.verdicts.push_back({"sigma_f = int g^gamma", sg <= 1e-12, fmt::format("max relative error {:.3g}", sg)});
  res.verdicts.push_back({"tau_f_inv vs brute-force inversion", bf <= 2e-4,
                          fmt::format("max gap {:.3g} at Delta = {}", bf, kDelta)});
}

void simulate_chain(const ExperimentConfig& cfg, SuiteResult& res) {
  const ParsedKernel pk = parse_kernel(cfg.kernel);
  const KernelPtr k = collapse_absorbing(pk.kernel);
  const std::size_t dump = cfg.get_size("dump_paths", 0);
  const MomentTable dp = absorption_moments(*k, cfg.n_grid.back(), 1);
  std::uint64_t tag = 0;
  for (std::size_t n : cfg.n_grid) {
    const auto paths = run_replicates(cfg.replicates, cfg.threads, [&](std::size_t i) {
      Stream rng = stream_for(cfg, tag, i);
      return sample_path(*k, n, rng);
    });
    std::vector<double> a;
    Table pt{fmt::format("paths_n{}", n), {"replicate", "step", "state"}, {}};
    for (std::size_t i = 0; i < paths.size(); ++i) {
      a.push_back(static_cast<double>(paths[i].absorption_time()));
      json r;
      r["type"] = "replicate";
      r["kernel"] = paths[i].kernel_id;
      r["n"] = n;
      r["seed"] = paths[i].seed;
      r["stream"] = paths[i].stream;
      r["A_n"] = paths[i].absorption_time();
      res.replicate_records.push_back(std::move(r));
      if (i < dump) {
        for (std::size_t s = 0; s < paths[i].states.size(); ++s) pt.rows.push_back({cell(i), cell(s), cell(paths[i].states[s])});
      }
    }
    if (dump) res.tables.push_back(std::move(pt));
    ++tag;
    const auto e = empirical_moment(a, 1.0);
    res.estimates[fmt::format("E[A_{}]", n)] = estimate_json(e, dp.moment(n, 1));
    res.verdicts.push_back(within_se(fmt::format("MC E[A_n] vs exact DP at n = {}", n), e, dp.moment(n, 1)));
  }
}

void exact_moments(const ExperimentConfig& cfg, SuiteResult& res) {
  const ParsedKernel pk = parse_kernel(cfg.kernel);
  const KernelPtr k = collapse_absorbing(pk.kernel);
  const std::size_t n_max = cfg.n_grid.back();
  const std::size_t p_max = cfg.get_size("p_max", 2);
  const MomentTable tab = absorption_moments(*k, n_max, p_max);
  Table t{"exact_moments", {"n", "p", "moment", "normalized"}, {}};
  bool zeroth = true, lyapunov = true;
  for (std::size_t n = 1; n <= n_max; ++n) {
    zeroth = zeroth && tab.moment(n, 0) == 1.0;
    double prev = 0.0;
    for (std::size_t p = 1; p <= p_max; ++p) {
      const double norm = std::pow(tab.moment(n, p), 1.0 / static_cast<double>(p));
      lyapunov = lyapunov && norm >= prev * (1.0 - 1e-12);
      prev = norm;
      t.rows.push_back({cell(n), cell(p), cell(tab.moment(n, p)), cell(tab.normalized(n, p))});
    }
  }
  for (std::size_t p = 1; p <= p_max; ++p) res.estimates[fmt::format("normalized_p{} at n_max", p)] = tab.normalized(n_max, p);
  res.verdicts.push_back({"E[A_n^0] = 1", zeroth, ""});
  res.verdicts.push_back({"p -> E[A_n^p]^(1/p) non-decreasing", lyapunov, ""});
  res.tables.push_back(std::move(t));
}

}  // namespace

bool SuiteResult::pass() const {
  return error.empty() && !verdicts.empty() &&
         std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

std::string code_version() { return SELFSIM_VERSION; }

SuiteResult run_suite(const ExperimentConfig& cfg) {
  validate(cfg);
  SuiteResult res;
  res.suite = cfg.suite;
  const auto start = std::chrono::steady_clock::now();
  static const std::map<std::string, void (*)(const ExperimentConfig&, SuiteResult&)> table{
      {"moment-limit", moment_limit},
      {"finite-mean", finite_mean},
      {"coalescent", coalescent_suite},
      {"subordinator-marginal", subordinator_marginal},
      {"exponential-functional", exponential_functional},
      {"martingales", martingales},
      {"coupling", coupling},
      {"composition", composition_suite},
      {"h-diagnostic", h_diagnostic},
      {"marginal-ks", marginal_ks},
      {"time-change", time_change_suite},
      {"simulate-chain", simulate_chain},
      {"exact-moments", exact_moments},
      {"simulate-limit", simulate_limit}};
  try {
    table.at(cfg.suite)(cfg, res);
  } catch (const std::exception& e) {
    res.error = e.what();
    res.verdicts.push_back({"suite completed", false, e.what()});
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

json run_record(const SuiteResult& result, const ExperimentConfig& cfg) {
  json r;
  r["type"] = "run";
  r["suite"] = result.suite;
  r["digest"] = cfg.digest();
  r["code_version"] = code_version();
  r["seed"] = *cfg.seed;
  r["pass"] = result.pass();
  json verdicts = json::array();
  for (const auto& v : result.verdicts) verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  r["verdicts"] = verdicts;
  r["estimates"] = result.estimates;
  r["wall_clock_seconds"] = result.wall_seconds;
  return r;
}

void persist(const SuiteResult& result, const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path root(cfg.out);
  fs::create_directories(root / "runs");
  fs::create_directories(root / "tables");
  const fs::path record = root / "runs" / (result.suite + ".jsonl");
  const std::string digest = cfg.digest();
  if (fs::exists(record)) {
    std::ifstream in(record);
    std::string first;
    std::getline(in, first);
    std::string old;
    try {
      old = json::parse(first).at("digest").get<std::string>();
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("{}: existing file is not a run record; refusing to overwrite", record.string()));
    }
    if (old != digest) {
      throw ConfigError(fmt::format("{}: holds a run with config digest {}, this run has {}; refusing to overwrite",
                                    record.string(), old, digest));
    }
  }
  {
    std::ofstream out(record, std::ios::trunc);
    out << run_record(result, cfg).dump() << '\n';
    for (const auto& r : result.replicate_records) out << r.dump() << '\n';
  }
  for (const Table& t : result.tables) {
    std::ofstream out(root / "tables" / (t.name + ".csv"), std::ios::trunc);
    for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
    out << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        const bool quote = row[i].find_first_of(",\"") != std::string::npos;
        if (i) out << ',';
        if (quote) {
          out << '"';
          for (char c : row[i]) out << (c == '"' ? "\"\"" : std::string(1, c));
          out << '"';
        } else {
          out << row[i];
        }
      }
      out << '\n';
    }
  }
}

}  // namespace selfsim
