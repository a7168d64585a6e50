#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epw/torus_field.hpp"

namespace epw {

enum class EllipticScheme { newton, k_fixed_point };

const char* to_string(EllipticScheme s);
EllipticScheme elliptic_scheme_from_string(const std::string& s);

struct EllipticOptions {
  double tol = 1e-10;
  EllipticScheme scheme = EllipticScheme::newton;
  int max_iterations = 200;
  double delta_floor = 1e-4;
};

struct EllipticSolveResult {
  EvenField phi;
  int iterations = 0;
  double final_residual = 0.0;  // sup |H(phi) - f|
  EllipticScheme scheme = EllipticScheme::newton;
};

/// H(phi) = -phi'' + exp(phi), nodewise on the grid.
EvenField hb_apply(const EvenField& phi);

/// Periodic Helmholtz kernel G_lambda(x) = cosh(sqrt(l)(x - L floor(x/L) - L/2)) / (2 sqrt(l) sinh(sqrt(l) L/2)).
double green_kernel(double lambda, double L, double x);

/// Solves (lambda I - D2) phi = h with a dense LU factorization.
EvenField helmholtz_inverse(double lambda, const EvenField& h);

/// Trapezoidal convolution of h with green_kernel; agrees with
/// helmholtz_inverse to O(h^2).
EvenField helmholtz_convolution(double lambda, const EvenField& h);

/// phi = H^{-1}(f). Newton: (-D2 + diag(e^phi)) delta = f - H(phi) from
/// phi_0 = log(mean f). k_fixed_point: (-D2 + diag(k(phi_n))) phi_{n+1} = f - 1
/// with k(r) = (e^r - 1)/r. Throws DomainError when min f < delta_floor and
/// NonConvergenceError past max_iterations.
EllipticSolveResult hb_invert(const EvenField& f, const EllipticOptions& opts = {});

/// (e^r - 1) / r, continuous at r = 0.
double k_factor(double r);

/// Solves (-D2 + diag(weight)) w = rhs; weight must be positive.
Eigen::VectorXd solve_shifted_laplacian(const TorusGrid& g, const Eigen::Ref<const Eigen::VectorXd>& weight,
                                        const Eigen::Ref<const Eigen::VectorXd>& rhs);

struct MonotoneTransportReport {
  bool increasing_inside = false;
  bool concave_at_crest = false;
  bool convex_at_trough = false;
  std::optional<int> witness;  // first node where the forward difference is not positive
  double crest_curvature = 0.0;
  double trough_curvature = 0.0;

  bool passed() const { return increasing_inside && concave_at_crest && convex_at_trough; }
};

/// For h even, non-constant and non-decreasing on (-L/2, 0), checks that
/// (lambda - D2)^{-1} h is strictly increasing there with negative curvature at
/// the crest and positive curvature at the trough.
MonotoneTransportReport validate_monotone_transport(double lambda, const EvenField& h);

}  // namespace epw
