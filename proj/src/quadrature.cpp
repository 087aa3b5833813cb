#include "selfsim/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace selfsim {
namespace {

// Kronrod abscissae on [-1, 1] (non-negative half), Kronrod weights, and the weights
// of the embedded 7-point Gauss rule (which uses every odd-indexed abscissa).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  std::size_t piece;
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

struct Piece {
  ScalarFn f;  // integrand in this piece's own variable
};

void gk15(const ScalarFn& f, Segment& s, std::size_t& evals) {
  const double center = 0.5 * (s.a + s.b);
  const double half = 0.5 * (s.b - s.a);
  const double fc = f(center);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  evals += 15;
  s.value = resk * half;
  s.error = std::abs((resk - resg) * half);
}

QuadResult run_adaptive(const std::vector<Piece>& pieces,
                        const std::vector<std::pair<double, double>>& ranges,
                        const QuadOptions& opts) {
  QuadResult out;
  std::priority_queue<Segment> heap;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (!(ranges[i].second > ranges[i].first)) continue;
    Segment s{i, ranges[i].first, ranges[i].second, 0.0, 0.0};
    gk15(pieces[i].f, s, out.evaluations);
    heap.push(s);
  }
  auto totals = [&heap]() {
    // recomputed from scratch so that accumulated rounding never drifts
    CompensatedSum v, e;
    auto copy = heap;
    while (!copy.empty()) {
      v.add(copy.top().value);
      e.add(copy.top().error);
      copy.pop();
    }
    return std::pair{v.value(), e.value()};
  };
  CompensatedSum value_acc, error_acc;
  {
    auto [v, e] = totals();
    value_acc = CompensatedSum(v);
    error_acc = CompensatedSum(e);
  }
  std::size_t splits = 0;
  while (!heap.empty()) {
    const double value = value_acc.value();
    const double error = error_acc.value();
    if (error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(value))) break;
    if (splits >= opts.max_subdivisions) {
      out.converged = false;
      break;
    }
    Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // interval can no longer be split in floating point
      out.converged = false;
      break;
    }
    heap.pop();
    Segment left{worst.piece, worst.a, mid, 0.0, 0.0};
    Segment right{worst.piece, mid, worst.b, 0.0, 0.0};
    gk15(pieces[worst.piece].f, left, out.evaluations);
    gk15(pieces[worst.piece].f, right, out.evaluations);
    value_acc.add(left.value + right.value - worst.value);
    error_acc.add(left.error + right.error - worst.error);
    heap.push(left);
    heap.push(right);
    ++splits;
  }
  auto [v, e] = totals();
  out.value = v;
  out.error = e;
  if (!std::isfinite(out.value)) out.converged = false;
  return out;
}

}  // namespace

QuadResult integrate_adaptive(const ScalarFn& f, double a, double b,
                              std::span<const double> breaks, const QuadOptions& opts) {
  std::vector<double> cuts{a};
  for (double c : breaks) {
    if (c > cuts.back() && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);
  std::vector<Piece> pieces;
  std::vector<std::pair<double, double>> ranges;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    pieces.push_back({f});
    ranges.emplace_back(cuts[i], cuts[i + 1]);
  }
  return run_adaptive(pieces, ranges, opts);
}

QuadResult integrate_endpoint_powers(const ScalarFn& h, double a, double b, double pa,
                                     double pb, std::span<const double> breaks,
                                     const QuadOptions& opts) {
  if (!(pa > -1.0) || !(pb > -1.0)) {
    throw DomainError("integrate_endpoint_powers: exponents must exceed -1");
  }
  if (!(b > a)) return {};
  std::vector<double> cuts{a};
  for (double c : breaks) {
    if (c > cuts.back() && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);
  if (cuts.size() == 2 && (pa != 0.0 || pb != 0.0)) {
    cuts.insert(cuts.begin() + 1, 0.5 * (a + b));
  }
  const std::size_t npieces = cuts.size() - 1;
  std::vector<Piece> pieces;
  std::vector<std::pair<double, double>> ranges;
  for (std::size_t i = 0; i < npieces; ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    const bool first = i == 0;
    const bool last = i + 1 == npieces;
    if (first && pa != 0.0) {
      const double e = 1.0 + pa;
      // x = a + u^(1/e); (x - a)^pa dx = du / e
      pieces.push_back({[=, &h](double u) {
        const double x = a + std::pow(u, 1.0 / e);
        const double right = pb == 0.0 ? 1.0 : std::pow(b - x, pb);
        return h(x) * right / e;
      }});
      ranges.emplace_back(0.0, std::pow(hi - a, e));
    } else if (last && pb != 0.0) {
      const double e = 1.0 + pb;
      pieces.push_back({[=, &h](double v) {
        const double x = b - std::pow(v, 1.0 / e);
        const double left = pa == 0.0 ? 1.0 : std::pow(x - a, pa);
        return h(x) * left / e;
      }});
      ranges.emplace_back(0.0, std::pow(b - lo, e));
    } else {
      pieces.push_back({[=, &h](double x) {
        double w = h(x);
        if (pa != 0.0) w *= std::pow(x - a, pa);
        if (pb != 0.0) w *= std::pow(b - x, pb);
        return w;
      }});
      ranges.emplace_back(lo, hi);
    }
  }
  return run_adaptive(pieces, ranges, opts);
}

double integrate_or_throw(const ScalarFn& h, double a, double b, double pa, double pb,
                          std::span<const double> breaks, const QuadOptions& opts,
                          const char* context) {
  QuadResult r = integrate_endpoint_powers(h, a, b, pa, pb, breaks, opts);
  if (!r.converged) throw QuadratureError(std::string(context) + ": quadrature did not converge", r);
  return r.value;
}

}  // namespace selfsim
