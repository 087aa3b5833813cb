#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "selfsim/numeric.hpp"

namespace selfsim {

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  std::size_t max_subdivisions = 4000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

/// Thrown when adaptive refinement runs out of budget; carries what was achieved.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, QuadResult achieved)
      : Error(what + " (estimate " + std::to_string(achieved.value) + ", error " +
              std::to_string(achieved.error) + ")"),
        achieved_(achieved) {}
  const QuadResult& achieved() const { return achieved_; }

 private:
  QuadResult achieved_;
};

using ScalarFn = std::function<double(double)>;

/// Globally adaptive 15-point Gauss-Kronrod over [a, b], optionally pre-split at `breaks`.
QuadResult integrate_adaptive(const ScalarFn& f, double a, double b,
                              std::span<const double> breaks = {},
                              const QuadOptions& opts = {});

/// Integrates h(x) * (x - a)^pa * (b - x)^pb over [a, b] for pa, pb > -1.
///
/// The end pieces are mapped through u = (x - a)^(1 + pa) and v = (b - x)^(1 + pb), so
/// a declared power singularity never reaches the Kronrod rule; `h` only has to be smooth.
/// Interior `breaks` (sorted, strictly inside (a, b)) split the range further, which is
/// how peaked integrands get resolved cheaply.
QuadResult integrate_endpoint_powers(const ScalarFn& h, double a, double b, double pa,
                                     double pb, std::span<const double> breaks = {},
                                     const QuadOptions& opts = {});

/// Same as above but throws QuadratureError instead of returning an unconverged result.
double integrate_or_throw(const ScalarFn& h, double a, double b, double pa, double pb,
                          std::span<const double> breaks = {}, const QuadOptions& opts = {},
                          const char* context = "quadrature");

}  // namespace selfsim
