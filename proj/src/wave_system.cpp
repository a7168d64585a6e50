#include "epw/wave_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "epw/errors.hpp"
#include "format.hpp"

namespace epw {

using detail::num;

namespace {

WaveState build_state(const PressureLaw& p, double c, EvenField f, const WaveOptions& opts) {
  EllipticOptions eopts;
  eopts.tol = opts.elliptic_tol;
  eopts.delta_floor = opts.delta_floor;
  auto solve = hb_invert(f, eopts);
  WaveState s{c, std::move(f), std::move(solve.phi), a_star(p, c), {}};
  s.diagnostics.min_f = s.f.values.minCoeff();
  s.diagnostics.max_f = s.f.values.maxCoeff();
  s.diagnostics.gap = s.a_star_c - s.diagnostics.max_f;
  s.diagnostics.residual_sup = residual(p, s).values.cwiseAbs().maxCoeff();
  return s;
}

}  // namespace

WaveState make_wave_state_unchecked(const PressureLaw& p, double c, EvenField f, const WaveOptions& opts) {
  return build_state(p, c, std::move(f), opts);
}

WaveState make_wave_state(const PressureLaw& p, double c, EvenField f, const WaveOptions& opts) {
  const double fmin = f.values.minCoeff();
  if (!(fmin > opts.delta_floor)) {
    throw ContractError("wave state below floor: min f=" + num(fmin) + " <= delta_floor=" + num(opts.delta_floor));
  }
  WaveState s = build_state(p, c, std::move(f), opts);
  if (s.diagnostics.max_f > s.a_star_c + opts.tol_touch) {
    throw ContractError("wave state above the critical density: max f=" + num(s.diagnostics.max_f) +
                        " > a*(c)=" + num(s.a_star_c) + " + tol_touch");
  }
  return s;
}

Eigen::VectorXd local_part(const PressureLaw& p, double c, const Eigen::Ref<const Eigen::VectorXd>& f) {
  Eigen::VectorXd out(f.size());
  const double p1 = p.p(1.0);
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    out[j] = 0.5 * c * c * (1.0 / (f[j] * f[j]) - 1.0) + p.p(f[j]) - p1;
  }
  return out;
}

Eigen::VectorXd local_slope(const PressureLaw& p, double c, const Eigen::Ref<const Eigen::VectorXd>& f) {
  Eigen::VectorXd out(f.size());
  for (Eigen::Index j = 0; j < f.size(); ++j) out[j] = p.dp(f[j]) - c * c / (f[j] * f[j] * f[j]);
  return out;
}

EvenField residual(const PressureLaw& p, const WaveState& state) {
  return EvenField(state.f.grid, local_part(p, state.c, state.f.values) + state.phi.values);
}

EvenField residual(const PressureLaw& p, double c, const EvenField& f, const WaveOptions& opts) {
  EllipticOptions eopts;
  eopts.tol = opts.elliptic_tol;
  eopts.delta_floor = opts.delta_floor;
  const auto solve = hb_invert(f, eopts);
  return EvenField(f.grid, local_part(p, c, f.values) + solve.phi.values);
}

EvenField jacobian_apply(const PressureLaw& p, const WaveState& state, const EvenField& h) {
  const auto& g = state.f.grid;
  const Eigen::VectorXd w = solve_shifted_laplacian(g, state.phi.values.array().exp().matrix(), h.values);
  return EvenField(g, local_slope(p, state.c, state.f.values).cwiseProduct(h.values) + w);
}

EvenField residual_c_derivative(const WaveState& state) {
  return EvenField(state.f.grid, state.c * (state.f.values.array().square().inverse() - 1.0).matrix());
}

double dispersion_speed(const PressureLaw& p, double L, int m) {
  if (m < 1) throw DomainError("dispersion mode must be >= 1, got " + std::to_string(m));
  if (!(L > 0.0)) throw DomainError("period must be positive, got L=" + num(L));
  const double dp1 = p.dp(1.0);
  if (!(dp1 > 0.0)) throw DomainError("dispersion relation needs p'(1) > 0, got " + num(dp1));
  const double k = 2.0 * std::numbers::pi * m / L;
  return std::sqrt(dp1 + 1.0 / (1.0 + k * k));
}

double discrete_dispersion_speed(const PressureLaw& p, const TorusGrid& g, int m) {
  if (m < 1 || m > g.M() / 2) throw DomainError("dispersion mode out of range: " + std::to_string(m));
  const double dp1 = p.dp(1.0);
  if (!(dp1 > 0.0)) throw DomainError("dispersion relation needs p'(1) > 0, got " + num(dp1));
  return std::sqrt(dp1 + 1.0 / (1.0 + g.symbol(m)));
}

bool WavePropertyReport::passed() const {
  for (const auto& c : checks) {
    if (c.asserted && !c.passed) return false;
  }
  return true;
}

const PropertyCheck& WavePropertyReport::get(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw IndexError("no property check named " + name);
}

WavePropertyReport validate_wave_properties(const PressureLaw& p, const WaveState& state,
                                            const PropertyThresholds& th) {
  (void)p;
  const auto& g = state.f.grid;
  const auto& f = state.f.values;
  if (!(state.diagnostics.residual_sup <= th.tol)) {
    throw ContractError("wave properties need a converged state, residual " + num(state.diagnostics.residual_sup));
  }
  const double deviation = (f.array() - 1.0).abs().maxCoeff();
  if (!(deviation > 10.0 * th.tol)) {
    throw ContractError("wave properties need a non-trivial state, |f - 1|_sup = " + num(deviation));
  }

  WavePropertyReport r;
  const double fmin = f.minCoeff(), fmax = f.maxCoeff();
  r.checks.push_back({"oscillation", fmin < 1.0 && 1.0 < fmax, true, std::nullopt, fmax - fmin});

  PropertyCheck mono{"monotonicity", true, true, std::nullopt, 0.0};
  const int crest = g.crest();
  double min_diff = std::numeric_limits<double>::infinity();
  for (int j = 0; j < crest; ++j) {
    const double d = f[j + 1] - f[j];
    min_diff = std::min(min_diff, d);
    const bool interior = j >= 1 && j <= crest - 2;
    if (d < -th.tol || (interior && !(d > 0.0))) {
      mono.passed = false;
      if (!mono.witness) mono.witness = j;
    }
  }
  mono.value = min_diff;
  r.checks.push_back(mono);

  const Eigen::VectorXd d2 = periodic_second_difference(f, g.h());
  PropertyCheck curvature{"curvature", d2[crest] < 0.0 && d2[g.trough()] > 0.0, true, std::nullopt, d2[crest]};
  if (!(state.diagnostics.gap > th.curvature_margin)) curvature.asserted = false;
  if (!curvature.passed) curvature.witness = d2[crest] < 0.0 ? g.trough() : crest;
  r.checks.push_back(curvature);

  double lip = 0.0;
  int lip_at = 0;
  for (int j = 0; j < g.M(); ++j) {
    const double s = std::abs(f[(j + 1) % g.M()] - f[j]) / g.h();
    if (s > lip) {
      lip = s;
      lip_at = j;
    }
  }
  PropertyCheck lipschitz{"lipschitz", lip < th.lipschitz_cap, true, std::nullopt, lip};
  if (!lipschitz.passed) lipschitz.witness = lip_at;
  r.checks.push_back(lipschitz);

  const double amp_gap = state.a_star_c - f[g.trough()];
  PropertyCheck amplitude{"amplitude_gap", amp_gap >= th.amplitude_floor, true, std::nullopt, amp_gap};
  if (!amplitude.passed) amplitude.witness = g.trough();
  r.checks.push_back(amplitude);
  return r;
}

}  // namespace epw
