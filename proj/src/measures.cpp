#include "selfsim/measures.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <string>

namespace selfsim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Substitute away an endpoint power unless it is a small non-negative integer,
// which the Kronrod rule already integrates well.
bool needs_substitution(double e) { return e < 4.0 && e != std::floor(e); }

double xlogy(double e, double log_x) { return e == 0.0 ? 0.0 : e * log_x; }

// x^j (1 - x)^m for an atom, with the 0^0 = 1 convention.
double atom_weight(double log_coef, double x, double j, double m) {
  if ((x == 0.0 && j < 0.0) || (x == 1.0 && m < 0.0)) {
    throw DomainError("binomial_moment: negative power of zero at an atom");
  }
  if ((x == 0.0 && j > 0.0) || (x == 1.0 && m > 0.0)) return 0.0;
  const double lx = x == 0.0 ? 0.0 : std::log(x);
  const double lw = x == 1.0 ? 0.0 : std::log1p(-x);
  return std::exp(log_coef + xlogy(j, lx) + xlogy(m, lw));
}

QuadResult& accumulate(QuadResult& total, const QuadResult& part) {
  total.value += part.value;
  total.error += part.error;
  total.evaluations += part.evaluations;
  total.converged = total.converged && part.converged;
  return total;
}

std::vector<double> peak_hints(double e0, double e1, double lo, double hi) {
  std::vector<double> hints;
  auto push = [&](double x) {
    if (x > lo && x < hi) hints.push_back(x);
  };
  if (e0 > 0.0 && e1 > 0.0) {
    const double peak = e0 / (e0 + e1);
    const double sd = std::sqrt(peak * (1.0 - peak) / (e0 + e1 + 1.0));
    for (double k : {-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0}) push(peak + k * sd);
  } else if (e0 > 0.0) {
    for (double k : {64.0, 16.0, 4.0, 1.0}) push(1.0 - k / (e0 + 1.0));
  } else if (e1 > 0.0) {
    for (double k : {1.0, 4.0, 16.0, 64.0}) push(k / (e1 + 1.0));
  }
  std::sort(hints.begin(), hints.end());
  hints.erase(std::unique(hints.begin(), hints.end()), hints.end());
  return hints;
}

}  // namespace

double PowerDensity::operator()(double x) const {
  if (!(x > 0.0 && x < 1.0)) return 0.0;
  double v = scale;
  if (p0 != 0.0) v *= std::pow(x, p0);
  if (p1 != 0.0) v *= std::pow(1.0 - x, p1);
  if (shape) v *= shape(x);
  return v;
}

FiniteMeasure FiniteMeasure::atom(double mass, double x) {
  if (!(mass >= 0.0) || !std::isfinite(mass)) throw DomainError("atom: mass must be finite and >= 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("atom: location must lie in [0, 1]");
  FiniteMeasure m;
  if (mass > 0.0) m.atoms_.push_back({x, mass});
  return m;
}

FiniteMeasure FiniteMeasure::beta_density(double a, double b, double scale) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta_density: a and b must be positive");
  if (!(scale >= 0.0)) throw DomainError("beta_density: scale must be >= 0");
  return power_density({scale * std::exp(-log_beta(a, b)), a - 1.0, b - 1.0, {}});
}

FiniteMeasure FiniteMeasure::barrier(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("barrier: gamma must lie in (0, 1)");
  return power_density({gamma, 0.0, -gamma, {}});
}

FiniteMeasure FiniteMeasure::lebesgue(double scale) { return power_density({scale, 0.0, 0.0, {}}); }

FiniteMeasure FiniteMeasure::power_density(PowerDensity d) {
  if (!(d.p0 > -1.0) || !(d.p1 > -1.0)) {
    throw DomainError("power_density: endpoint exponents must exceed -1 for a finite measure");
  }
  if (!(d.scale >= 0.0) || !std::isfinite(d.scale)) throw DomainError("power_density: bad scale");
  FiniteMeasure m;
  if (d.scale > 0.0) m.densities_.push_back(std::move(d));
  return m;
}

FiniteMeasure FiniteMeasure::operator+(const FiniteMeasure& other) const {
  FiniteMeasure m = *this;
  m.atoms_.insert(m.atoms_.end(), other.atoms_.begin(), other.atoms_.end());
  m.densities_.insert(m.densities_.end(), other.densities_.begin(), other.densities_.end());
  return m;
}

FiniteMeasure FiniteMeasure::scaled(double c) const {
  if (!(c >= 0.0)) throw DomainError("scaled: factor must be >= 0");
  FiniteMeasure m = *this;
  for (auto& a : m.atoms_) a.mass *= c;
  for (auto& d : m.densities_) d.scale *= c;
  return m;
}

double FiniteMeasure::atom0() const {
  double s = 0.0;
  for (const auto& a : atoms_) if (a.x == 0.0) s += a.mass;
  return s;
}

double FiniteMeasure::atom1() const {
  double s = 0.0;
  for (const auto& a : atoms_) if (a.x == 1.0) s += a.mass;
  return s;
}

double FiniteMeasure::density(double x) const {
  double s = 0.0;
  for (const auto& d : densities_) s += d(x);
  return s;
}

double FiniteMeasure::total_mass() const {
  CompensatedSum s;
  for (const auto& a : atoms_) s.add(a.mass);
  for (const auto& d : densities_) {
    if (d.pure()) {
      s.add(d.scale * std::exp(log_beta(d.p0 + 1.0, d.p1 + 1.0)));
    } else {
      FiniteMeasure single;
      single.densities_.push_back(d);
      s.add(selfsim::integrate(single, [](double) { return 1.0; }).value);
    }
  }
  return s.value();
}

void FiniteMeasure::validate() const {
  for (const auto& a : atoms_) {
    if (!(a.mass >= 0.0) || !std::isfinite(a.mass) || !(a.x >= 0.0 && a.x <= 1.0)) {
      throw DomainError("measure: invalid atom");
    }
  }
  for (const auto& d : densities_) {
    if (!(d.p0 > -1.0) || !(d.p1 > -1.0) || !(d.scale >= 0.0)) {
      throw DomainError("measure: density is not integrable");
    }
    if (d.shape) {
      for (double x : {1e-6, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0 - 1e-6}) {
        if (!(d.shape(x) >= 0.0)) throw DomainError("measure: density is negative");
      }
    }
  }
  const double mass = total_mass();
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw DomainError("measure: total mass must be finite and strictly positive");
  }
}

QuadResult FiniteMeasure::integrate(const ScalarFn& f, Interval iv, std::span<const double> hints,
                                    const QuadOptions& opts) const {
  QuadResult total;
  for (const auto& a : atoms_) {
    if (iv.contains(a.x)) total.value += a.mass * f(a.x);
  }
  if (!(iv.hi > iv.lo)) return total;
  for (const auto& d : densities_) {
    const double pa = (iv.lo == 0.0 && needs_substitution(d.p0)) ? d.p0 : 0.0;
    const double pb = (iv.hi == 1.0 && needs_substitution(d.p1)) ? d.p1 : 0.0;
    auto h = [&](double x) {
      double v = d.scale * f(x);
      if (d.p0 != pa) v *= std::pow(x, d.p0 - pa);
      if (d.p1 != pb) v *= std::pow(1.0 - x, d.p1 - pb);
      if (d.shape) v *= d.shape(x);
      return v;
    };
    accumulate(total, integrate_endpoint_powers(h, iv.lo, iv.hi, pa, pb, hints, opts));
  }
  return total;
}

double FiniteMeasure::binomial_moment(double log_coef, double j, double m, Interval iv,
                                      bool force_quadrature) const {
  CompensatedSum total;
  for (const auto& a : atoms_) {
    if (iv.contains(a.x)) total.add(a.mass * atom_weight(log_coef, a.x, j, m));
  }
  if (!(iv.hi > iv.lo)) return total.value();
  for (const auto& d : densities_) {
    const double e0 = j + d.p0;
    const double e1 = m + d.p1;
    if ((iv.lo == 0.0 && !(e0 > -1.0)) || (iv.hi == 1.0 && !(e1 > -1.0))) {
      throw DomainError("binomial_moment: integral diverges at an endpoint");
    }
    const double log_scale = std::log(d.scale);
    if (d.pure() && !force_quadrature && e0 > -1.0 && e1 > -1.0) {
      const double A = e0 + 1.0;
      const double B = e1 + 1.0;
      const double full = std::exp(log_coef + log_scale + log_beta(A, B));
      double frac = 1.0;
      if (iv.lo > 0.0 && iv.hi < 1.0) {
        frac = boost::math::ibeta(A, B, iv.hi) - boost::math::ibeta(A, B, iv.lo);
      } else if (iv.lo > 0.0) {
        frac = boost::math::ibetac(A, B, iv.lo);
      } else if (iv.hi < 1.0) {
        frac = boost::math::ibeta(A, B, iv.hi);
      }
      total.add(full * frac);
      continue;
    }
    const double pa = (iv.lo == 0.0 && needs_substitution(e0)) ? e0 : 0.0;
    const double pb = (iv.hi == 1.0 && needs_substitution(e1)) ? e1 : 0.0;
    auto h = [&](double x) {
      const double lx = std::log(x);
      const double lw = std::log1p(-x);
      double v = std::exp(log_coef + log_scale + xlogy(e0 - pa, lx) + xlogy(e1 - pb, lw));
      if (d.shape) v *= d.shape(x);
      return v;
    };
    const auto hints = peak_hints(e0, e1, iv.lo, iv.hi);
    QuadOptions opts;
    opts.abs_tol = 1e-300;
    opts.rel_tol = 1e-11;
    opts.max_subdivisions = 20000;
    total.add(integrate_or_throw(h, iv.lo, iv.hi, pa, pb, hints, opts, "binomial_moment"));
  }
  return total.value();
}

QuadResult integrate(const FiniteMeasure& mu, const ScalarFn& f) {
  QuadResult r = mu.integrate(f);
  if (!r.converged) throw QuadratureError("integrate: quadrature did not converge", r);
  return r;
}

double laplace_exponent(const FiniteMeasure& mu, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("laplace_exponent: lambda must be >= 0");
  if (lambda == 0.0) return mu.atom0();
  return integrate(mu, [lambda](double x) { return bracket(lambda, x); }).value;
}

// ---------------------------------------------------------------------------------------

LevyMeasure LevyMeasure::from_measure(const FiniteMeasure& mu) {
  LevyMeasure out;
  for (const auto& a : mu.atoms()) {
    if (a.x > 0.0 && a.x < 1.0) out.mu_ = out.mu_ + FiniteMeasure::atom(a.mass, a.x);
  }
  for (const auto& d : mu.densities()) out.mu_ = out.mu_ + FiniteMeasure::power_density(d);
  return out;
}

LevyMeasure LevyMeasure::atom(double rate, double y0) {
  if (!(y0 > 0.0) || !std::isfinite(y0)) throw DomainError("levy atom: location must be in (0, inf)");
  if (!(rate >= 0.0)) throw DomainError("levy atom: rate must be >= 0");
  LevyMeasure out;
  out.mu_ = FiniteMeasure::atom(rate * -std::expm1(-y0), std::exp(-y0));
  return out;
}

LevyMeasure LevyMeasure::operator+(const LevyMeasure& other) const {
  LevyMeasure out;
  out.mu_ = mu_ + other.mu_;
  return out;
}

bool LevyMeasure::empty() const { return mu_.atoms().empty() && mu_.densities().empty(); }

double LevyMeasure::density(double y) const {
  if (!(y > 0.0)) return 0.0;
  const double x = std::exp(-y);
  const double w = -std::expm1(-y);
  double s = 0.0;
  for (const auto& d : mu_.densities()) {
    double v = d.scale;
    if (d.p0 != 0.0) v *= std::exp(-d.p0 * y);
    if (d.p1 != 0.0) v *= std::pow(w, d.p1);
    if (d.shape) v *= d.shape(x);
    s += v;
  }
  return s * x / w;
}

std::vector<Atom> LevyMeasure::atoms() const {
  std::vector<Atom> out;
  for (const auto& a : mu_.atoms()) out.push_back({-std::log(a.x), a.mass / (1.0 - a.x)});
  return out;
}

double LevyMeasure::tail(double y) const {
  if (!(y > 0.0)) throw DomainError("levy tail: y must be positive");
  return mu_.binomial_moment(0.0, 0.0, -1.0, Interval{0.0, std::exp(-y), false});
}

double LevyMeasure::power_at_zero() const {
  double p = kInf;
  for (const auto& d : mu_.densities()) p = std::min(p, d.p1 - 1.0);
  return std::isfinite(p) ? p : 0.0;
}

double LevyMeasure::decay_at_infinity() const {
  double p = kInf;
  for (const auto& d : mu_.densities()) p = std::min(p, d.p0 + 1.0);
  return std::isfinite(p) ? p : 1.0;
}

double LevyMeasure::integrate_y(const ScalarFn& g, double y_lo, double y_hi, double g_order) const {
  if (!(y_lo >= 0.0) || !(y_hi > y_lo)) throw DomainError("integrate_y: bad range");
  CompensatedSum total;
  for (const auto& a : atoms()) {
    if (a.x > y_lo && a.x <= y_hi) total.add(g(a.x) * a.mass);
  }
  for (const auto& d : mu_.densities()) {
    LevyMeasure single;
    single.mu_ = FiniteMeasure::power_density(d);
    auto omega = [&single](double y) { return single.density(y); };
    const double split = std::max(y_lo, 1.0);
    if (y_lo < 1.0) {
      const double hi = std::min(y_hi, 1.0);
      if (y_lo == 0.0) {
        const double e0 = d.p1 - 1.0 + g_order;
        if (!(e0 > -1.0)) throw DomainError("integrate_y: integral diverges at y = 0");
        const double pa = e0 == 0.0 ? 0.0 : e0;
        auto h = [&](double y) { return g(y) * omega(y) * (pa == 0.0 ? 1.0 : std::pow(y, -pa)); };
        total.add(integrate_or_throw(h, 0.0, hi, pa, 0.0, {}, {}, "integrate_y"));
      } else {
        auto h = [&](double y) { return g(y) * omega(y); };
        total.add(integrate_or_throw(h, y_lo, hi, 0.0, 0.0, {}, {}, "integrate_y"));
      }
    }
    if (y_hi > split) {
      if (std::isinf(y_hi)) {
        // s = exp(split - y) maps (split, inf) onto (0, 1]; the integrand behaves like s^p0
        const double pa = needs_substitution(d.p0) ? d.p0 : 0.0;
        auto h = [&](double s) {
          const double y = split - std::log(s);
          double v = g(y) * omega(y) / s;
          if (pa != 0.0) v *= std::pow(s, -pa);
          return v;
        };
        total.add(integrate_or_throw(h, 0.0, 1.0, pa, 0.0, {}, {}, "integrate_y"));
      } else {
        auto h = [&](double y) { return g(y) * omega(y); };
        total.add(integrate_or_throw(h, split, y_hi, 0.0, 0.0, {}, {}, "integrate_y"));
      }
    }
  }
  return total.value();
}

LevyTriple levy_triple(const FiniteMeasure& mu) {
  mu.validate();
  return {mu.atom0(), mu.atom1(), LevyMeasure::from_measure(mu)};
}

double laplace_exponent(const LevyTriple& triple, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("laplace_exponent: lambda must be >= 0");
  if (lambda == 0.0) return triple.killing;
  double s = triple.killing + triple.drift * lambda;
  if (!triple.levy.empty()) {
    s += triple.levy.integrate_y([lambda](double y) { return -std::expm1(-lambda * y); }, 0.0,
                                 std::numeric_limits<double>::infinity(), 1.0);
  }
  return s;
}

}  // namespace selfsim
