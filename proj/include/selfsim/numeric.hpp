#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace selfsim {

// Base of every error the library throws on its own account.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double init) : sum_(init) {}

  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

double log_gamma(double x);
double log_beta(double a, double b);
double log_binomial(double n, double k);

/// [lambda]_x = (1 - x^lambda) / (1 - x), continuous at x = 1 where it equals lambda.
double bracket(double lambda, double x);

/// P(X > x) for X ~ chi-square with `dof` degrees of freedom.
double chi_square_sf(double x, double dof);

}  // namespace selfsim
