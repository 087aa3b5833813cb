#include "selfsim/limit_process.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace selfsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTableStep = 0.01;  // spacing of the tail table in log y
}  // namespace

// ---------------------------------------------------------------------------------------
// SubordinatorPath

double SubordinatorPath::xi(double t) const {
  if (t >= killing_time) return kInf;
  const auto idx = static_cast<std::size_t>(
      std::upper_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin());
  return drift * t + (idx ? jump_cumsum[idx - 1] : 0.0);
}

double SubordinatorPath::xi_before(double t) const {
  if (t > killing_time) return kInf;
  const auto idx = static_cast<std::size_t>(
      std::lower_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin());
  return drift * t + (idx ? jump_cumsum[idx - 1] : 0.0);
}

// ---------------------------------------------------------------------------------------
// SubordinatorSampler

SubordinatorSampler::SubordinatorSampler(const LevyTriple& triple, double horizon, double eps_cut)
    : triple_(triple), horizon_(horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("subordinator: horizon must be positive");
  if (!(triple.killing >= 0.0) || !(triple.drift >= 0.0)) {
    throw DomainError("subordinator: killing and drift must be >= 0");
  }
  FiniteMeasure dens;
  for (const auto& d : triple.levy.x_form().densities()) dens = dens + FiniteMeasure::power_density(d);
  density_part_ = LevyMeasure::from_measure(dens);
  const auto atoms = triple.levy.atoms();
  const bool has_density = !density_part_.empty();

  auto small_moment = [&](double eps, double power) {
    double v = 0.0;
    if (has_density) {
      v += density_part_.integrate_y([power](double y) { return std::pow(y, power); }, 0.0, eps, power);
    }
    for (const auto& a : atoms) {
      if (a.x <= eps) v += std::pow(a.x, power) * a.mass;
    }
    return v;
  };

  if (triple.levy.empty()) {
    eps_ = 0.0;
  } else if (eps_cut > 0.0) {
    eps_ = eps_cut;
  } else {
    const double bound = 1e-6 / horizon;
    if (small_moment(1.0, 2.0) <= bound) {
      eps_ = 1.0;
    } else {
      double lo = std::log(1e-15), hi = 0.0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (small_moment(std::exp(mid), 2.0) <= bound) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      eps_ = std::exp(lo);
    }
  }
  drift_ = triple.drift;
  if (eps_ > 0.0) {
    drift_ += small_moment(eps_, 1.0);
    neglected_variance_ = small_moment(eps_, 2.0);
  }
  for (const auto& a : atoms) {
    if (a.x > eps_) {
      big_atoms_.push_back(a);
      rate_ += a.mass;
    }
  }
  if (has_density) {
    density_rate_ = density_part_.tail(eps_);
    rate_ += density_rate_;
    build_table();
  }
}

double SubordinatorSampler::density_tail(double y) const { return density_part_.tail(y); }

void SubordinatorSampler::build_table() {
  far_decay_ = density_part_.decay_at_infinity();
  double y_max = std::max(1.0, 2.0 * eps_);
  while (y_max < 700.0 && density_part_.tail(y_max) > 1e-17 * density_rate_) y_max *= 1.5;
  const double s0 = std::log(eps_);
  const double s1 = std::log(y_max);
  const auto count = static_cast<std::size_t>(std::ceil((s1 - s0) / kTableStep)) + 1;
  const double h = (s1 - s0) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = s0 + h * static_cast<double>(i);
    const double y = std::exp(s);
    const double t = density_part_.tail(y);
    if (!(t > 0.0)) break;
    s_.push_back(s);
    log_tail_.push_back(std::log(t));
    slope_.push_back(-y * density_part_.density(y) / t);
  }
  if (s_.size() < 2) throw Error("subordinator: jump-size table is degenerate");
}

double SubordinatorSampler::invert_density_tail(double u) const {
  const double target = std::log(u) + log_tail_.front();
  if (target >= log_tail_.front()) return std::exp(s_.front());
  if (target <= log_tail_.back()) {
    // beyond the table the tail decays like exp(-far_decay * y)
    return std::exp(s_.back()) + (log_tail_.back() - target) / far_decay_;
  }
  // log_tail_ is decreasing: first index whose value drops to the target or below
  const auto it = std::lower_bound(log_tail_.begin(), log_tail_.end(), target,
                                   [](double a, double b) { return a > b; });
  const std::size_t i = static_cast<std::size_t>(it - log_tail_.begin()) - 1;
  const double h = s_[i + 1] - s_[i];
  const double l0 = log_tail_[i], l1 = log_tail_[i + 1];
  const double m0 = slope_[i] * h, m1 = slope_[i + 1] * h;
  auto hermite = [&](double t) {
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * l0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * l1 +
           (t3 - t2) * m1;
  };
  auto derivative = [&](double t) {
    const double t2 = t * t;
    return (6 * t2 - 6 * t) * l0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * l1 +
           (3 * t2 - 2 * t) * m1;
  };
  double lo = 0.0, hi = 1.0;
  double t = (l0 - target) / (l0 - l1);
  for (int it2 = 0; it2 < 100; ++it2) {
    const double f = hermite(t) - target;
    if (f > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    if (hi - lo < 1e-15) break;
    const double d = derivative(t);
    double next = d != 0.0 ? t - f / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) < 1e-15) {
      t = next;
      break;
    }
    t = next;
  }
  return std::exp(s_[i] + t * h);
}

double SubordinatorSampler::sample_jump(Stream& rng) const {
  double u = rng.uniform() * rate_;
  if (u < density_rate_) return invert_density_tail(rng.uniform());
  u -= density_rate_;
  for (const auto& a : big_atoms_) {
    if (u < a.mass) return a.x;
    u -= a.mass;
  }
  return big_atoms_.empty() ? invert_density_tail(rng.uniform()) : big_atoms_.back().x;
}

SubordinatorPath SubordinatorSampler::sample(Stream& rng) const {
  SubordinatorPath path;
  path.drift = drift_;
  path.eps_cut = eps_;
  path.neglected_variance = neglected_variance_;
  path.killing_time = triple_.killing > 0.0 ? rng.exponential() / triple_.killing : kInf;
  extend(path, horizon_, rng);
  return path;
}

void SubordinatorSampler::extend(SubordinatorPath& path, double new_horizon, Stream& rng) const {
  if (!(new_horizon >= path.horizon)) throw DomainError("subordinator: horizon cannot shrink");
  const double stop = std::min(new_horizon, path.killing_time);
  if (rate_ > 0.0) {
    double t = path.horizon;
    while (true) {
      t += rng.exponential() / rate_;
      if (t > stop) break;
      const double size = sample_jump(rng);
      path.jump_times.push_back(t);
      path.jump_sizes.push_back(size);
      path.jump_cumsum.push_back((path.jump_cumsum.empty() ? 0.0 : path.jump_cumsum.back()) + size);
    }
  }
  path.horizon = new_horizon;
}

SubordinatorPath sample_subordinator(const LevyTriple& triple, double eps_cut, double horizon,
                                     Stream& rng) {
  return SubordinatorSampler(triple, horizon, eps_cut).sample(rng);
}

// ---------------------------------------------------------------------------------------
// Lamperti transform

double LimitSample::Y(double t) const {
  if (segments.empty() || t < 0.0) return t < 0.0 ? 1.0 : 0.0;
  const auto it = std::upper_bound(segments.begin(), segments.end(), t,
                                   [](double v, const LampertiSegment& s) { return v < s.clock_start; });
  const LampertiSegment& s = *(it == segments.begin() ? it : it - 1);
  const double c = t - s.clock_start;
  if (c >= s.clock_len) return 0.0;
  if (s.slope == 0.0) return std::exp(-s.xi_start);
  const double inner = std::exp(-gamma * s.xi_start) - gamma * s.slope * c;
  return inner > 0.0 ? std::pow(inner, 1.0 / gamma) : 0.0;
}

double LimitSample::tau(double t) const {
  if (segments.empty()) return kInf;
  const auto it = std::upper_bound(segments.begin(), segments.end(), t,
                                   [](double v, const LampertiSegment& s) { return v < s.clock_start; });
  const LampertiSegment& s = *(it == segments.begin() ? it : it - 1);
  const double c = t - s.clock_start;
  if (c >= s.clock_len) return kInf;
  const double scale = std::exp(gamma * s.xi_start);
  if (s.slope == 0.0) return s.real_start + c * scale;
  return s.real_start - std::log1p(-gamma * s.slope * c * scale) / (gamma * s.slope);
}

LimitSample lamperti(const SubordinatorPath& path, double gamma, double psi_gamma, double tail_tol) {
  if (!(gamma > 0.0)) throw DomainError("lamperti: gamma must be positive");
  LimitSample out;
  out.gamma = gamma;
  out.killed = path.killed();
  out.killing_time = path.killing_time;
  const double end = std::min(path.horizon, path.killing_time);
  CompensatedSum clock, integral;
  double start = 0.0;
  double jumps = 0.0;
  auto add_segment = [&](double stop) {
    const double len = stop - start;
    if (!(len > 0.0)) return;
    const double a = path.drift * start + jumps;
    const double b = path.drift;
    const double base = std::exp(-gamma * a);
    const double c = b > 0.0 ? base * -std::expm1(-gamma * b * len) / (gamma * b) : base * len;
    out.segments.push_back({start, len, a, b, clock.value(), c});
    clock.add(c);
    integral.add(c);
  };
  for (std::size_t j = 0; j < path.jump_times.size() && path.jump_times[j] < end; ++j) {
    add_segment(path.jump_times[j]);
    start = path.jump_times[j];
    jumps = path.jump_cumsum[j];
  }
  add_segment(end);
  out.I = integral.value();
  out.sigma = clock.value();
  if (!out.killed) {
    if (psi_gamma > 0.0 && std::isfinite(psi_gamma)) {
      out.tail_correction = std::exp(-gamma * path.xi(path.horizon)) / psi_gamma;
      out.horizon_ok = out.tail_correction < tail_tol * out.I;
      out.I += out.tail_correction;
      out.sigma += out.tail_correction;
    } else {
      out.horizon_ok = false;
    }
  }
  return out;
}

LimitSample sample_limit(const SubordinatorSampler& sampler, double gamma, double psi_gamma,
                         Stream& rng, double tail_tol, std::size_t max_extensions) {
  SubordinatorPath path = sampler.sample(rng);
  LimitSample s = lamperti(path, gamma, psi_gamma, tail_tol);
  for (std::size_t e = 0; e < max_extensions && !s.horizon_ok; ++e) {
    sampler.extend(path, path.horizon + sampler.horizon(), rng);
    s = lamperti(path, gamma, psi_gamma, tail_tol);
  }
  return s;
}

std::vector<double> analytic_moments(const std::function<double(double)>& psi, double gamma,
                                     std::size_t p_max) {
  std::vector<double> m(p_max + 1, 1.0);
  for (std::size_t p = 1; p <= p_max; ++p) {
    const double v = psi(gamma * static_cast<double>(p));
    if (!(v > 0.0)) {
      throw DomainError(fmt::format("analytic_moments: psi({}) = {} is not positive",
                                    gamma * static_cast<double>(p), v));
    }
    m[p] = m[p - 1] * static_cast<double>(p) / v;
  }
  return m;
}

std::vector<double> analytic_moments(const FiniteMeasure& mu, double gamma, std::size_t p_max) {
  return analytic_moments([&mu](double l) { return laplace_exponent(mu, l); }, gamma, p_max);
}

// ---------------------------------------------------------------------------------------
// Balls in gaps

GapComposition balls_in_gaps(const SubordinatorPath& path, std::span<const double> uniforms) {
  if (path.killed()) throw PreconditionError("balls_in_gaps: the subordinator must not be killed");
  GapComposition out;
  const std::size_t m = path.jump_times.size();
  std::vector<double> left(m), right(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double before = path.drift * path.jump_times[j] + (j ? path.jump_cumsum[j - 1] : 0.0);
    left[j] = -std::expm1(-before);
    right[j] = -std::expm1(-(before + path.jump_sizes[j]));
  }
  const double reach = -std::expm1(-path.xi(path.horizon));
  // key: the left end of the ball's gap, or the ball itself when it is not in a gap
  std::vector<std::pair<double, bool>> keys;
  keys.reserve(uniforms.size());
  for (double u : uniforms) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("balls_in_gaps: uniforms must lie in (0, 1)");
    if (u >= reach) {
      out.insufficient = true;
      ++out.uncovered_balls;
      keys.emplace_back(u, false);
      continue;
    }
    const auto it = std::upper_bound(left.begin(), left.end(), u);
    if (it != left.begin()) {
      const std::size_t j = static_cast<std::size_t>(it - left.begin()) - 1;
      if (u < right[j]) {
        keys.emplace_back(left[j], true);
        continue;
      }
    }
    ++out.uncovered_balls;
    keys.emplace_back(u, false);
  }
  std::sort(keys.begin(), keys.end());
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i + 1;
    if (keys[i].second) {
      while (j < keys.size() && keys[j] == keys[i]) ++j;
    }
    out.composition.parts.push_back(j - i);
    i = j;
  }
  if (out.uncovered_balls > 0) out.insufficient = true;
  return out;
}

GapComposition balls_in_gaps(const SubordinatorSampler& sampler, std::size_t n, Stream& rng) {
  if (n == 0) throw PreconditionError("balls_in_gaps: n must be >= 1");
  if (sampler.triple().killing > 0.0) {
    throw PreconditionError("balls_in_gaps: the subordinator must not be killed");
  }
  std::vector<double> u(n);
  for (double& x : u) x = rng.uniform();
  const double top = *std::max_element(u.begin(), u.end());
  SubordinatorPath path = sampler.sample(rng);
  for (int e = 0; e < 64 && -std::expm1(-path.xi(path.horizon)) <= top; ++e) {
    sampler.extend(path, 2.0 * path.horizon, rng);
  }
  return balls_in_gaps(path, u);
}

}  // namespace selfsim
