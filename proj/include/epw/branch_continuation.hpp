#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "epw/local_bifurcation.hpp"
#include "epw/pressure.hpp"
#include "epw/torus_field.hpp"
#include "epw/wave_system.hpp"

namespace epw {

struct ContinuationConfig {
  int M = 1024;
  double tol_newton = 1e-9;
  double elliptic_tol = 1e-10;
  double ds_init = 0.02;
  double ds_min = 1e-8;
  double ds_max = 0.2;
  double tol_touch_rel = 1e-3;         // tol_touch = tol_touch_rel * a*(c0)
  int max_steps = 200;
  double delta_floor = 1e-4;
  double c_cap_factor = 10.0;          // c_cap = c_cap_factor * c0
  double amplitude_floor = 1e-2;
  double curvature_margin_rel = 0.05;  // curvature_margin = curvature_margin_rel * a*(c0)
  double lipschitz_cap = 100.0;
  double s_seed = 0.05;
  int max_newton_iter = 8;  // a corrector needing more is treated as a failed step
  int theta_fit_points = 10;

  /// Throws ValidationError naming the first bad field.
  void validate() const;
};

enum class StopReason { touched, max_steps, step_underflow, monitor_violation };
const char* to_string(StopReason r);

struct BranchPoint {
  double s_arc = 0.0;
  WaveState state;
  double amplitude = 0.0;
  double gap = 0.0;
  double crest_slope = 0.0;
  int newton_iters = 0;
  WavePropertyReport monitors;  // wave properties plus delta_floor, c_cap, amplitude_monotone
};

struct Branch {
  std::vector<BranchPoint> points;
  StopReason stop_reason = StopReason::max_steps;
  std::optional<double> theta_extrapolated;
  double c0 = 0.0;
  double tol_touch = 0.0;
  double c_cap = 0.0;
  double curvature_margin = 0.0;
};

/// Everything needed to take the next step; two consecutive points give the
/// secant tangent. prev may be an unrecorded auxiliary point right after the seed.
struct ContinuationState {
  double prev_c = 0.0;
  Eigen::VectorXd prev_f;
  double last_c = 0.0;
  Eigen::VectorXd last_f;
  double ds = 0.0;
  int steps = 0;
  double s_arc = 0.0;
};

using StepCallback = std::function<void(const ContinuationState&, const BranchPoint&)>;

/// Pseudo-arclength continuation from small_amplitude_wave(s_seed) toward
/// the touching state. A step is rejected (ds halved) when the corrector fails
/// within max_newton_iter, when max f would exceed a*(c), or when min f falls
/// below delta_floor. on_step runs after every accepted point.
Branch trace_branch(const PressureLaw& p, double L, const ContinuationConfig& cfg,
                    const StepCallback& on_step = {});

/// Continues from a saved state; the returned branch starts with the state's
/// last point, recomputed, and reproduces the uninterrupted run exactly.
Branch resume_branch(const PressureLaw& p, double L, const ContinuationConfig& cfg, const ContinuationState& state,
                     const StepCallback& on_step = {});

/// sqrt((a*(c) - exp(-G_c(a*(c)))) / G_c''(a*(c))); DegenerateCornerError
/// when the radicand is not positive.
double theoretical_theta(const PressureLaw& p, double c);

/// sqrt(-phi''(0) / G_c''(a*(c))) with phi'' the discrete second difference of
/// the elliptic solution at the crest.
double theta_from_potential(const PressureLaw& p, const WaveState& state);

/// d a*(c) / dc from differentiating xi^3 p'(xi) = c^2.
double a_star_derivative(const PressureLaw& p, double c);

struct LimitWave {
  WaveState state;
  int newton_iterations = 0;
  double crest_slope = 0.0;      // (f(0) - f(-h)) / h
  double slope_intercept = 0.0;  // theta from fitting (a* - f(x_j)) / |x_j| = theta + b |x_j| on 5 nodes
  double slope_linear_coef = 0.0;
  double theta = 0.0;            // theoretical_theta(p, c)
  double theta_potential = 0.0;  // theta_from_potential
  std::vector<PropertyCheck> checks;  // even, increasing, bounds, oscillation
  bool passed() const;
};

/// Solves {F(c, f) = 0 at every node; f(0) = a*(c)} in (c, f) from the last
/// point of a touched branch, resampled to cfg.M if the grids differ.
LimitWave solve_limit_wave(const PressureLaw& p, double L, const Branch& seed, const ContinuationConfig& cfg);

struct HolderSeminorms {
  double lipschitz = 0.0;
  double half_holder = 0.0;
};

/// Discrete Lipschitz seminorm and C^{1/2} seminorm over at most 1e5 node
/// pairs no more than half a period apart.
HolderSeminorms holder_diagnostics(const EvenField& f);

/// Trigonometric interpolation of an even field onto another grid of the same period.
EvenField resample_even(const EvenField& f, const TorusGrid& target);

}  // namespace epw
