#pragma once

#include <span>
#include <string>
#include <vector>

#include "selfsim/quadrature.hpp"

namespace selfsim {

/// scale * x^p0 * (1 - x)^p1 * shape(x) on (0, 1).
///
/// The exponents declare the endpoint behaviour; quadrature absorbs them by substitution
/// so `shape` only needs to be smooth and bounded. An empty `shape` means 1, which also
/// unlocks closed-form Beta integrals.
struct PowerDensity {
  double scale = 1.0;
  double p0 = 0.0;
  double p1 = 0.0;
  ScalarFn shape;

  double operator()(double x) const;
  bool pure() const { return !shape; }
};

struct Atom {
  double x;
  double mass;
};

/// A sub-interval of [0, 1]; the lower end is always closed.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool include_hi = true;

  bool contains(double x) const { return x >= lo && (include_hi ? x <= hi : x < hi); }
};

/// Finite non-negative measure on [0, 1]: atoms plus a sum of power-law densities.
class FiniteMeasure {
 public:
  FiniteMeasure() = default;

  static FiniteMeasure atom(double mass, double x);
  /// scale times the Beta(a, b) probability density.
  static FiniteMeasure beta_density(double a, double b, double scale = 1.0);
  /// gamma (1 - x)^(-gamma) dx, the random-walk-with-barrier limit.
  static FiniteMeasure barrier(double gamma);
  static FiniteMeasure lebesgue(double scale = 1.0);
  static FiniteMeasure power_density(PowerDensity d);

  FiniteMeasure operator+(const FiniteMeasure& other) const;
  FiniteMeasure scaled(double c) const;

  double atom0() const;
  double atom1() const;
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const PowerDensity> densities() const { return densities_; }

  double density(double x) const;
  double total_mass() const;

  /// Throws DomainError unless the measure is non-zero, finite and non-negative.
  void validate() const;

  /// Integral of f over `iv`; atoms are added exactly.
  QuadResult integrate(const ScalarFn& f, Interval iv = {}, std::span<const double> hints = {},
                       const QuadOptions& opts = {}) const;

  /// Integral over `iv` of exp(log_coef) x^j (1 - x)^m mu(dx).
  ///
  /// Pure power densities use (incomplete) Beta functions in log space; anything else
  /// falls back to quadrature with the peak of the integrand as a split point.
  double binomial_moment(double log_coef, double j, double m, Interval iv = {},
                         bool force_quadrature = false) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<PowerDensity> densities_;
};

/// Throws QuadratureError when the integral does not converge.
QuadResult integrate(const FiniteMeasure& mu, const ScalarFn& f);

/// psi(lambda) = int [lambda]_x mu(dx); psi(0) = mu({0}).
double laplace_exponent(const FiniteMeasure& mu, double lambda);

/// Levy measure omega on (0, inf), held as the push-forward of (1 - x)^(-1) mu(dx) on (0, 1)
/// under x -> -log x.
class LevyMeasure {
 public:
  LevyMeasure() = default;
  /// Interior part of mu; endpoint atoms are dropped.
  static LevyMeasure from_measure(const FiniteMeasure& mu);
  /// `rate` times a unit atom at y0 > 0.
  static LevyMeasure atom(double rate, double y0);

  LevyMeasure operator+(const LevyMeasure& other) const;

  /// mu restricted to (0, 1): omega(dy) is the image of (1 - x)^(-1) times this.
  const FiniteMeasure& x_form() const { return mu_; }

  bool empty() const;
  double density(double y) const;
  std::vector<Atom> atoms() const;  // (y, mass)

  /// omega((y, inf)) computed in x coordinates.
  double tail(double y) const;

  /// Behaviour of the density near 0 and infinity: omega(y) ~ y^power_at_zero(),
  /// omega(y) ~ exp(-decay_at_infinity() * y).
  double power_at_zero() const;
  double decay_at_infinity() const;

  /// int over (y_lo, y_hi] of g(y) omega(dy) in y coordinates (y_hi may be +inf).
  /// `g_order` is the power of y at which g vanishes at 0, used for the substitution.
  double integrate_y(const ScalarFn& g, double y_lo, double y_hi, double g_order = 0.0) const;

 private:
  FiniteMeasure mu_;
};

struct LevyTriple {
  double killing = 0.0;
  double drift = 0.0;
  LevyMeasure levy;
};

LevyTriple levy_triple(const FiniteMeasure& mu);

/// k + d lambda + int (1 - e^{-lambda y}) omega(dy), integrated in y coordinates.
double laplace_exponent(const LevyTriple& triple, double lambda);

}  // namespace selfsim
