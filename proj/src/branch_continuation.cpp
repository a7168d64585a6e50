#include "epw/branch_continuation.hpp"

#include <algorithm>
#include <cmath>

#include "bordered_newton.hpp"
#include "epw/errors.hpp"
#include "format.hpp"

namespace epw {

using detail::num;

void ContinuationConfig::validate() const {
  auto positive = [](const char* name, double v) {
    if (!(v > 0.0)) throw ValidationError(std::string(name) + " must be positive, got " + num(v));
  };
  if (M < 32 || M % 2 != 0) throw ValidationError("M must be even and >= 32, got " + std::to_string(M));
  positive("tol_newton", tol_newton);
  positive("elliptic_tol", elliptic_tol);
  positive("ds_min", ds_min);
  positive("tol_touch_rel", tol_touch_rel);
  positive("delta_floor", delta_floor);
  positive("c_cap_factor", c_cap_factor);
  positive("amplitude_floor", amplitude_floor);
  positive("curvature_margin_rel", curvature_margin_rel);
  positive("lipschitz_cap", lipschitz_cap);
  positive("s_seed", s_seed);
  if (!(ds_min <= ds_init && ds_init <= ds_max)) {
    throw ValidationError("need ds_min <= ds_init <= ds_max, got " + num(ds_min) + ", " + num(ds_init) + ", " +
                          num(ds_max));
  }
  if (max_steps < 0) throw ValidationError("max_steps must be >= 0, got " + std::to_string(max_steps));
  if (max_newton_iter < 1) throw ValidationError("max_newton_iter must be >= 1, got " + std::to_string(max_newton_iter));
  if (theta_fit_points < 2) {
    throw ValidationError("theta_fit_points must be >= 2, got " + std::to_string(theta_fit_points));
  }
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::touched: return "touched";
    case StopReason::max_steps: return "max_steps";
    case StopReason::step_underflow: return "step_underflow";
    case StopReason::monitor_violation: return "monitor_violation";
  }
  return "?";
}

namespace {

WaveOptions wave_options(const ContinuationConfig& cfg) {
  WaveOptions w;
  w.elliptic_tol = cfg.elliptic_tol;
  w.delta_floor = cfg.delta_floor;
  return w;
}

// Fills in the thresholds that scale with the bifurcation point.
Branch empty_branch(const PressureLaw& p, const TorusGrid& g, const ContinuationConfig& cfg) {
  Branch b;
  b.c0 = discrete_dispersion_speed(p, g, 1);
  const double a0 = a_star(p, b.c0);
  b.tol_touch = cfg.tol_touch_rel * a0;
  b.c_cap = cfg.c_cap_factor * b.c0;
  b.curvature_margin = cfg.curvature_margin_rel * a0;
  return b;
}

BranchPoint make_point(const PressureLaw& p, WaveState state, double s_arc, int iters, const Branch& b,
                       const ContinuationConfig& cfg, std::optional<double> prev_amplitude) {
  const auto& g = state.f.grid;
  const double amplitude = cosine_coefficient(state.f, 1);
  const double crest_slope = (state.f.crest_value() - state.f[g.crest() - 1]) / g.h();
  BranchPoint pt{s_arc, std::move(state), amplitude, 0.0, crest_slope, iters, {}};
  pt.gap = pt.state.diagnostics.gap;

  PropertyThresholds th;
  th.tol = std::max(10.0 * cfg.tol_newton, 1e-8);
  th.curvature_margin = b.curvature_margin;
  th.lipschitz_cap = cfg.lipschitz_cap;
  th.amplitude_floor = cfg.amplitude_floor;
  pt.monitors = validate_wave_properties(p, pt.state, th);

  const double fmin = pt.state.diagnostics.min_f;
  PropertyCheck floor{"delta_floor", fmin >= cfg.delta_floor, true, std::nullopt, fmin};
  pt.monitors.checks.push_back(floor);
  PropertyCheck cap{"c_cap", std::abs(pt.state.c) <= b.c_cap, true, std::nullopt, pt.state.c};
  pt.monitors.checks.push_back(cap);
  PropertyCheck mono{"amplitude_monotone", !prev_amplitude || pt.amplitude > *prev_amplitude, true, std::nullopt,
                     prev_amplitude ? pt.amplitude - *prev_amplitude : 0.0};
  pt.monitors.checks.push_back(mono);
  return pt;
}

struct Tangent {
  double c;
  Eigen::VectorXd f;
};

Tangent secant(const ContinuationState& s, double h) {
  Tangent t{s.last_c - s.prev_c, s.last_f - s.prev_f};
  const double n = std::sqrt(t.c * t.c + t.f.squaredNorm() * h);
  t.c /= n;
  t.f /= n;
  return t;
}

std::optional<double> fit_theta(const Branch& b, int n_fit) {
  const int n = static_cast<int>(b.points.size());
  const int k = std::min(n, n_fit);
  if (k < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = n - k; i < n; ++i) {
    const double x = b.points[static_cast<std::size_t>(i)].gap, y = b.points[static_cast<std::size_t>(i)].crest_slope;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = k * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) return std::nullopt;
  const double slope = (k * sxy - sx * sy) / den;
  return (sy - slope * sx) / k;
}

Branch run(const PressureLaw& p, const TorusGrid& g, const ContinuationConfig& cfg, ContinuationState s, Branch b,
           const StepCallback& on_step) {
  const WaveOptions wave = wave_options(cfg);
  const double h = g.h();
  detail::BorderedNewtonOptions nopts{cfg.tol_newton, cfg.max_newton_iter, wave};

  auto finish = [&](StopReason r) {
    b.stop_reason = r;
    if (r == StopReason::touched) b.theta_extrapolated = fit_theta(b, cfg.theta_fit_points);
    return b;
  };
  if (!b.points.empty()) {
    if (!b.points.back().monitors.passed()) return finish(StopReason::monitor_violation);
    if (b.points.back().gap <= b.tol_touch) return finish(StopReason::touched);
  }

  while (s.steps < cfg.max_steps) {
    const Tangent t = secant(s, h);
    const double c_start = s.last_c + s.ds * t.c;
    detail::SideFn side = [&](double c, const Eigen::VectorXd& f) {
      const double e = t.c * (c - s.last_c) + (f - s.last_f).dot(t.f) * h - s.ds;
      return detail::SideCondition{e, t.f * h, t.c};
    };
    auto sol = detail::bordered_newton(p, g, c_start, s.last_f + s.ds * t.f, side, nopts);

    bool ok = sol.converged;
    if (ok) {
      const double fmin = sol.f.minCoeff(), fmax = sol.f.maxCoeff();
      ok = fmin > cfg.delta_floor && a_star(p, sol.c) - fmax >= 0.0;
    }
    if (!ok) {
      s.ds *= 0.5;
      if (s.ds < cfg.ds_min) return finish(StopReason::step_underflow);
      continue;
    }

    WaveState state = make_wave_state(p, sol.c, EvenField(g, sol.f), wave);
    const double used = s.ds;
    s.s_arc += used;
    ++s.steps;
    if (sol.iterations <= 3) s.ds = std::min(1.3 * s.ds, cfg.ds_max);
    s.prev_c = s.last_c;
    s.prev_f = std::move(s.last_f);
    s.last_c = sol.c;
    s.last_f = std::move(sol.f);

    const std::optional<double> prev_amp =
        b.points.empty() ? std::nullopt : std::optional<double>(b.points.back().amplitude);
    b.points.push_back(make_point(p, std::move(state), s.s_arc, sol.iterations, b, cfg, prev_amp));
    if (on_step) on_step(s, b.points.back());
    if (!b.points.back().monitors.passed()) return finish(StopReason::monitor_violation);
    if (b.points.back().gap <= b.tol_touch) return finish(StopReason::touched);
  }
  return finish(StopReason::max_steps);
}

}  // namespace

Branch trace_branch(const PressureLaw& p, double L, const ContinuationConfig& cfg, const StepCallback& on_step) {
  cfg.validate();
  const TorusGrid g(L, cfg.M);
  Branch b = empty_branch(p, g, cfg);

  SmallAmplitudeOptions lopts;
  lopts.M = cfg.M;
  lopts.tol = cfg.tol_newton;
  lopts.wave = wave_options(cfg);
  // Seed and an unrecorded companion slightly further out give the first secant,
  // oriented toward growing amplitude.
  const auto seed = small_amplitude_wave(p, L, cfg.s_seed, lopts);
  const auto aux = small_amplitude_wave(p, L, 0.9 * cfg.s_seed, lopts);

  ContinuationState s;
  s.prev_c = aux.state.c;
  s.prev_f = aux.state.f.values;
  s.last_c = seed.state.c;
  s.last_f = seed.state.f.values;
  s.ds = cfg.ds_init;

  b.points.push_back(make_point(p, seed.state, 0.0, seed.newton_iterations, b, cfg, std::nullopt));
  if (on_step) on_step(s, b.points.back());
  return run(p, g, cfg, std::move(s), std::move(b), on_step);
}

Branch resume_branch(const PressureLaw& p, double L, const ContinuationConfig& cfg, const ContinuationState& state,
                     const StepCallback& on_step) {
  cfg.validate();
  const TorusGrid g(L, cfg.M);
  if (state.last_f.size() != cfg.M || state.prev_f.size() != cfg.M) {
    throw ValidationError("checkpoint grid size " + std::to_string(state.last_f.size()) + " does not match M=" +
                          std::to_string(cfg.M));
  }
  if (!(state.ds > 0.0)) throw ValidationError("checkpoint step must be positive, got ds=" + num(state.ds));
  Branch b = empty_branch(p, g, cfg);
  WaveState last = make_wave_state(p, state.last_c, EvenField(g, state.last_f), wave_options(cfg));
  const double prev_amp = cosine_coefficient(g, state.prev_f, 1);
  // The previous point is only a predecessor when a step has been taken.
  std::optional<double> prev = state.steps > 0 ? std::optional<double>(prev_amp) : std::nullopt;
  b.points.push_back(make_point(p, std::move(last), state.s_arc, 0, b, cfg, prev));
  return run(p, g, cfg, state, std::move(b), on_step);
}

double a_star_derivative(const PressureLaw& p, double c) {
  const double a = a_star(p, c);
  return 2.0 * c / (3.0 * a * a * p.dp(a) + a * a * a * p.d2p(a));
}

double theoretical_theta(const PressureLaw& p, double c) {
  const double a = a_star(p, c);
  const double num_ = a - std::exp(-g_c(p, c, a, 0));
  const double den = g_c(p, c, a, 2);
  const double r = num_ / den;
  // A numerator at roundoff level means (c, a*) is the constant state, not a corner.
  if (!(num_ > 1e-12 * a) || !(den > 0.0) || !(r > 0.0) || !std::isfinite(r)) {
    throw DegenerateCornerError("corner radicand (a* - exp(-G_c(a*))) / G_c''(a*) = " + num(num_) + " / " +
                                num(den) + " is not positive at c=" + num(c));
  }
  return std::sqrt(r);
}

double theta_from_potential(const PressureLaw& p, const WaveState& state) {
  const auto& g = state.phi.grid;
  const Eigen::VectorXd d2 = periodic_second_difference(state.phi.values, g.h());
  const double r = -d2[g.crest()] / g_c(p, state.c, state.a_star_c, 2);
  if (!(r > 0.0)) {
    throw DegenerateCornerError("-phi''(0) / G_c''(a*) = " + num(r) + " is not positive at c=" + num(state.c));
  }
  return std::sqrt(r);
}

bool LimitWave::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

EvenField resample_even(const EvenField& f, const TorusGrid& target) {
  if (f.grid == target) return f;
  if (f.grid.L() != target.L()) throw ValidationError("resampling needs equal periods");
  const int kmax = std::min(f.grid.M(), target.M()) / 2;
  std::vector<double> coeffs(static_cast<std::size_t>(kmax + 1));
  for (int k = 0; k <= kmax; ++k) coeffs[static_cast<std::size_t>(k)] = cosine_coefficient(f, k);
  // The Nyquist mode of the coarser grid is split between +-k on the finer one.
  if (f.grid.M() < target.M()) coeffs.back() *= 0.5;
  return cosine_synthesis(target, coeffs);
}

LimitWave solve_limit_wave(const PressureLaw& p, double L, const Branch& seed, const ContinuationConfig& cfg) {
  cfg.validate();
  if (seed.stop_reason != StopReason::touched || seed.points.empty()) {
    throw ContractError(std::string("limit wave needs a touched branch, got stop reason ") +
                        to_string(seed.stop_reason));
  }
  const TorusGrid g(L, cfg.M);
  const WaveOptions wave = wave_options(cfg);
  const auto& last = seed.points.back().state;
  const EvenField f0 = resample_even(last.f, g);
  const int crest = g.crest();

  detail::SideFn pin = [&](double c, const Eigen::VectorXd& f) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(f.size());
    grad[crest] = 1.0;
    return detail::SideCondition{f[crest] - a_star(p, c), grad, -a_star_derivative(p, c)};
  };
  detail::BorderedNewtonOptions nopts{cfg.tol_newton, 30, wave};
  auto sol = detail::bordered_newton(p, g, last.c, f0.values, pin, nopts);
  if (!sol.converged) {
    throw NonConvergenceError("pinned limit-wave Newton failed, residual " + num(sol.residual) +
                                  "; retrace the seed branch with a tighter tol_touch",
                              sol.residual, sol.iterations);
  }

  LimitWave out{make_wave_state(p, sol.c, EvenField(g, std::move(sol.f)), wave), 0, 0.0, 0.0, 0.0, 0.0, 0.0, {}};
  out.newton_iterations = sol.iterations;
  const auto& f = out.state.f;
  const double a = out.state.a_star_c;
  out.crest_slope = (f.crest_value() - f[crest - 1]) / g.h();

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  constexpr int kFit = 5;
  for (int i = 1; i <= kFit; ++i) {
    const double x = i * g.h();
    const double y = (a - f[crest - i]) / x;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.slope_linear_coef = (kFit * sxy - sx * sy) / (kFit * sxx - sx * sx);
  out.slope_intercept = (sy - out.slope_linear_coef * sx) / kFit;
  out.theta = theoretical_theta(p, out.state.c);
  out.theta_potential = theta_from_potential(p, out.state);

  const double defect = f.evenness_defect();
  out.checks.push_back({"even", defect <= 1e-12, true, std::nullopt, defect});
  PropertyCheck inc{"increasing", true, true, std::nullopt, 0.0};
  double min_diff = std::numeric_limits<double>::infinity();
  for (int j = 0; j < crest; ++j) {
    const double d = f[j + 1] - f[j];
    min_diff = std::min(min_diff, d);
    if (!(d > 0.0) && !inc.witness) {
      inc.passed = false;
      inc.witness = j;
    }
  }
  inc.value = min_diff;
  out.checks.push_back(inc);
  PropertyCheck bounds{"bounds", true, true, std::nullopt, 0.0};
  for (int j = 0; j < g.M(); ++j) {
    if (j == crest) continue;
    if (!(f[j] > cfg.delta_floor && f[j] < a) && !bounds.witness) {
      bounds.passed = false;
      bounds.witness = j;
    }
  }
  out.checks.push_back(bounds);
  out.checks.push_back(
      {"oscillation", f.trough_value() < 1.0 && 1.0 < f.crest_value(), true, std::nullopt, f.crest_value()});
  return out;
}

HolderSeminorms holder_diagnostics(const EvenField& f) {
  const auto& g = f.grid;
  const int m = g.M();
  HolderSeminorms out;
  for (int j = 0; j < m; ++j) {
    out.lipschitz = std::max(out.lipschitz, std::abs(f[(j + 1) % m] - f[j]) / g.h());
  }
  // Every node against a log-spaced set of offsets up to half a period.
  const int half = m / 2;
  const int budget = std::max(1, 100000 / m);
  std::vector<int> offsets;
  for (int i = 0; i < budget; ++i) {
    const int d = static_cast<int>(std::lround(std::pow(static_cast<double>(half), static_cast<double>(i) /
                                                                                      std::max(1, budget - 1))));
    if (offsets.empty() || d > offsets.back()) offsets.push_back(std::clamp(d, 1, half));
  }
  for (int d : offsets) {
    const double dist = std::sqrt(d * g.h());
    for (int j = 0; j < m; ++j) {
      out.half_holder = std::max(out.half_holder, std::abs(f[(j + d) % m] - f[j]) / dist);
    }
  }
  return out;
}

}  // namespace epw
