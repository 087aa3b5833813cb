#pragma once

#include <cstddef>
#include <vector>

namespace selfsim {

/// Right-continuous non-increasing step function on [0, inf) with values in [0, 1]:
/// values[i] on [breaks[i], breaks[i+1]), and values.back() from breaks.back() on.
struct StepFunction {
  std::vector<double> breaks;
  std::vector<double> values;

  double operator()(double t) const;
  std::size_t segment(double t) const;
  /// First time the function is 0, or +inf.
  double zero_time() const;
  /// Throws DomainError unless breaks start at 0 and increase, and values are
  /// non-increasing in [0, 1].
  void validate() const;
};

/// The gamma time change of a step function, computed segment by segment.
///
/// tau_f(t) = int_0^t f^-gamma for t < sigma_f (and +inf after), its right inverse
/// tau_f_inv, and g = f o tau_f_inv, which is again a step function.
class TimeChange {
 public:
  TimeChange(StepFunction f, double gamma);

  const StepFunction& f() const { return f_; }
  const StepFunction& g() const { return g_; }
  double gamma() const { return gamma_; }

  double tau(double t) const;
  double tau_inv(double s) const;
  /// sigma_f, the first zero of f.
  double sigma_f() const { return sigma_f_; }
  /// tau_f(sigma_f-), the first zero of g.
  double sigma_g() const { return g_.zero_time(); }
  /// int_0^inf g^gamma, summed over the constancy intervals of g.
  double integral_g_gamma() const;

 private:
  StepFunction f_;
  StepFunction g_;
  double gamma_;
  double sigma_f_;
};

TimeChange time_change(StepFunction f, double gamma);

}  // namespace selfsim
