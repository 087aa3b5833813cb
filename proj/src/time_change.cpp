#include "selfsim/time_change.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "selfsim/numeric.hpp"

namespace selfsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::size_t StepFunction::segment(double t) const {
  auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
  return it == breaks.begin() ? 0 : static_cast<std::size_t>(it - breaks.begin()) - 1;
}

double StepFunction::operator()(double t) const { return values[segment(t)]; }

double StepFunction::zero_time() const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0.0) return breaks[i];
  }
  return kInf;
}

void StepFunction::validate() const {
  if (breaks.empty() || breaks.size() != values.size()) {
    throw DomainError("step function: breaks and values must be non-empty and of equal size");
  }
  if (breaks[0] != 0.0) throw DomainError("step function: first break must be 0");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) throw DomainError("step function: value outside [0, 1]");
    if (i > 0 && !(breaks[i] > breaks[i - 1])) throw DomainError("step function: breaks must increase");
    if (i > 0 && values[i] > values[i - 1]) throw DomainError("step function: values must not increase");
  }
}

TimeChange::TimeChange(StepFunction f, double gamma) : f_(std::move(f)), gamma_(gamma) {
  f_.validate();
  if (!(gamma >= 0.0)) throw DomainError("time change: gamma must be >= 0");
  sigma_f_ = f_.zero_time();
  // g has the same values; its breaks are tau_f(breaks) up to and including the first zero
  CompensatedSum s;
  for (std::size_t i = 0; i < f_.values.size(); ++i) {
    g_.breaks.push_back(s.value());
    g_.values.push_back(f_.values[i]);
    if (f_.values[i] == 0.0 || i + 1 == f_.values.size()) break;
    const double len = f_.breaks[i + 1] - f_.breaks[i];
    s.add(len * std::pow(f_.values[i], -gamma_));
  }
}

double TimeChange::tau(double t) const {
  if (t >= sigma_f_) return kInf;
  const std::size_t i = f_.segment(t);
  return g_.breaks[i] + (t - f_.breaks[i]) * std::pow(f_.values[i], -gamma_);
}

double TimeChange::tau_inv(double s) const {
  const std::size_t i = g_.segment(s);
  if (g_.values[i] == 0.0) return f_.breaks[i];
  return f_.breaks[i] + (s - g_.breaks[i]) * std::pow(g_.values[i], gamma_);
}

double TimeChange::integral_g_gamma() const {
  if (g_.values.back() > 0.0) return kInf;
  CompensatedSum s;
  for (std::size_t i = 0; i + 1 < g_.values.size(); ++i) {
    s.add(std::pow(g_.values[i], gamma_) * (g_.breaks[i + 1] - g_.breaks[i]));
  }
  return s.value();
}

TimeChange time_change(StepFunction f, double gamma) { return TimeChange(std::move(f), gamma); }

}  // namespace selfsim
