#pragma once

#include <Eigen/Core>
#include <functional>

#include "epw/pressure.hpp"
#include "epw/torus_field.hpp"
#include "epw/wave_system.hpp"

namespace epw::detail {

// Scalar side condition e(c, f) = 0 with its gradient.
struct SideCondition {
  double value = 0.0;
  Eigen::VectorXd grad_f;
  double grad_c = 0.0;
};

using SideFn = std::function<SideCondition(double c, const Eigen::VectorXd& f)>;

struct BorderedNewtonOptions {
  double tol = 1e-10;
  int max_iterations = 30;
  WaveOptions wave{};
};

struct BorderedNewtonResult {
  double c = 0.0;
  Eigen::VectorXd f;
  int iterations = 0;
  double residual = 0.0;  // max(sup |F|, |e|) at the last iterate
  bool converged = false;
};

// Newton on {F(c, f) = 0, e(c, f) = 0}. Each step solves the sparse system
//   [diag(G_c'(f))   I   d_cF ] [df]   [-F]
//   [     -I         J     0  ] [w ] = [ 0]
//   [  grad_f        0  grad_c] [dc]   [-e]
// with J = -D2 + diag(e^phi), so w = J^{-1} df never forms a dense inverse.
// Never throws for iterates leaving the domain; reports converged = false.
BorderedNewtonResult bordered_newton(const PressureLaw& p, const TorusGrid& g, double c, Eigen::VectorXd f,
                                     const SideFn& side, const BorderedNewtonOptions& opts);

}  // namespace epw::detail
