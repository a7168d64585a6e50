#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epw/pb_solver.hpp"
#include "epw/pressure.hpp"
#include "epw/torus_field.hpp"

namespace epw {

struct WaveOptions {
  double elliptic_tol = 1e-10;
  double delta_floor = 1e-4;
  /// Allowed excursion of max f above a*(c).
  double tol_touch = 1e-3;
};

struct WaveDiagnostics {
  double min_f = 0.0;
  double max_f = 0.0;
  double gap = 0.0;  // a*(c) - max f
  double residual_sup = 0.0;
};

/// A point (c, f) of the traveling-wave problem with phi = H^{-1}(f) cached.
struct WaveState {
  double c = 0.0;
  EvenField f;
  EvenField phi;
  double a_star_c = 0.0;
  WaveDiagnostics diagnostics;
};

/// Builds a state, solving for phi and filling diagnostics. Throws
/// ContractError when f leaves (delta_floor, a*(c) + tol_touch].
WaveState make_wave_state(const PressureLaw& p, double c, EvenField f, const WaveOptions& opts = {});

/// Same as make_wave_state but without the membership check; used for
/// Newton iterates that may transiently leave the admissible set.
WaveState make_wave_state_unchecked(const PressureLaw& p, double c, EvenField f, const WaveOptions& opts = {});

/// G_c(f) evaluated nodewise.
Eigen::VectorXd local_part(const PressureLaw& p, double c, const Eigen::Ref<const Eigen::VectorXd>& f);
/// G_c'(f) = p'(f) - c^2 f^-3 nodewise.
Eigen::VectorXd local_slope(const PressureLaw& p, double c, const Eigen::Ref<const Eigen::VectorXd>& f);

/// F(c, f) = G_c(f) + H^{-1}(f).
EvenField residual(const PressureLaw& p, const WaveState& state);
/// Convenience overload that solves for phi.
EvenField residual(const PressureLaw& p, double c, const EvenField& f, const WaveOptions& opts = {});

/// d_f F(c, f) h = (p'(f) - c^2 f^-3) h + (-D2 + e^phi)^{-1} h.
EvenField jacobian_apply(const PressureLaw& p, const WaveState& state, const EvenField& h);

/// d_c F(c, f) = c (f^-2 - 1).
EvenField residual_c_derivative(const WaveState& state);

/// sqrt(p'(1) + 1/(1 + (2 pi m / L)^2)).
double dispersion_speed(const PressureLaw& p, double L, int m = 1);
/// Same relation with the continuum symbol replaced by the grid symbol of -D2,
/// so that the discrete Jacobian is exactly singular on mode m.
double discrete_dispersion_speed(const PressureLaw& p, const TorusGrid& g, int m = 1);

struct PropertyThresholds {
  double tol = 1e-8;                // residual tolerance and monotonicity slack
  double curvature_margin = 0.05;   // (c) is only asserted when gap exceeds this
  double lipschitz_cap = 100.0;
  double amplitude_floor = 1e-2;
};

struct PropertyCheck {
  std::string name;
  bool passed = false;
  bool asserted = true;  // false when the check was suspended
  std::optional<int> witness;
  double value = 0.0;
};

struct WavePropertyReport {
  std::vector<PropertyCheck> checks;  // oscillation, monotonicity, curvature, lipschitz, amplitude_gap
  bool passed() const;
  const PropertyCheck& get(const std::string& name) const;
};

/// Qualitative checks on a converged non-trivial wave: (a) min f < 1 < max f,
/// (b) f non-decreasing on (-L/2, 0) and strictly increasing inside,
/// (c) f'' < 0 at the crest and > 0 at the trough when gap > curvature_margin,
/// (d) Lipschitz seminorm below the cap, (e) a*(c) - f(-L/2) >= amplitude_floor.
WavePropertyReport validate_wave_properties(const PressureLaw& p, const WaveState& state,
                                            const PropertyThresholds& th = {});

}  // namespace epw
