#include "epw/pb_solver.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "epw/errors.hpp"
#include "format.hpp"

namespace epw {

using detail::num;

const char* to_string(EllipticScheme s) {
  return s == EllipticScheme::newton ? "newton" : "k_fixed_point";
}

EllipticScheme elliptic_scheme_from_string(const std::string& s) {
  if (s == "newton") return EllipticScheme::newton;
  if (s == "k_fixed_point") return EllipticScheme::k_fixed_point;
  throw ValidationError("unknown elliptic scheme '" + s + "' (expected newton or k_fixed_point)");
}

EvenField hb_apply(const EvenField& phi) {
  return EvenField(phi.grid, -periodic_second_difference(phi.values, phi.grid.h()) +
                                 phi.values.array().exp().matrix());
}

double green_kernel(double lambda, double L, double x) {
  if (!(lambda > 0.0)) throw DomainError("Helmholtz kernel needs lambda > 0, got " + num(lambda));
  const double s = std::sqrt(lambda);
  const double shifted = x - L * std::floor(x / L) - 0.5 * L;
  return std::cosh(s * shifted) / (2.0 * s * std::sinh(0.5 * s * L));
}

EvenField helmholtz_inverse(double lambda, const EvenField& h) {
  if (!(lambda > 0.0)) throw DomainError("Helmholtz inverse needs lambda > 0, got " + num(lambda));
  const auto& g = h.grid;
  const int m = g.M();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    a(j, j) = lambda + 2.0 * inv_h2;
    a(j, (j + 1) % m) -= inv_h2;
    a(j, (j + m - 1) % m) -= inv_h2;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  return EvenField(g, lu.solve(h.values));
}

EvenField helmholtz_convolution(double lambda, const EvenField& h) {
  const auto& g = h.grid;
  const int m = g.M();
  Eigen::VectorXd kernel(m);
  for (int d = 0; d < m; ++d) kernel[d] = green_kernel(lambda, g.L(), d * g.h());
  Eigen::VectorXd out(m);
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += kernel[(i - j + m) % m] * h.values[j];
    out[i] = acc * g.h();
  }
  return EvenField(g, std::move(out));
}

double k_factor(double r) {
  if (std::abs(r) < 1e-8) return 1.0 + 0.5 * r;
  return std::expm1(r) / r;
}

Eigen::VectorXd solve_shifted_laplacian(const TorusGrid& g, const Eigen::Ref<const Eigen::VectorXd>& weight,
                                        const Eigen::Ref<const Eigen::VectorXd>& rhs) {
  // Cyclic tridiagonal system with off-diagonals -1/h^2, reduced to two
  // ordinary tridiagonal solves by a Sherman-Morrison correction.
  const int n = g.M();
  const double off = -1.0 / (g.h() * g.h());
  Eigen::VectorXd diag = weight.array() + 2.0 / (g.h() * g.h());
  const double gamma = -diag[0];
  diag[0] -= gamma;
  diag[n - 1] -= off * off / gamma;

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  u[0] = gamma;
  u[n - 1] = off;

  // Thomas algorithm on both right-hand sides at once.
  Eigen::VectorXd cprime(n);
  Eigen::VectorXd x(n), z(n);
  double denom = diag[0];
  cprime[0] = off / denom;
  x[0] = rhs[0] / denom;
  z[0] = u[0] / denom;
  for (int i = 1; i < n; ++i) {
    denom = diag[i] - off * cprime[i - 1];
    cprime[i] = off / denom;
    x[i] = (rhs[i] - off * x[i - 1]) / denom;
    z[i] = (u[i] - off * z[i - 1]) / denom;
  }
  for (int i = n - 2; i >= 0; --i) {
    x[i] -= cprime[i] * x[i + 1];
    z[i] -= cprime[i] * z[i + 1];
  }
  const double fact = (x[0] + off * x[n - 1] / gamma) / (1.0 + z[0] + off * z[n - 1] / gamma);
  return x - fact * z;
}

namespace {

double sup_residual(const EvenField& phi, const EvenField& f) {
  return (hb_apply(phi).values - f.values).cwiseAbs().maxCoeff();
}

}  // namespace

EllipticSolveResult hb_invert(const EvenField& f, const EllipticOptions& opts) {
  const double fmin = f.values.minCoeff();
  const double fmax = f.values.maxCoeff();
  if (!(fmin >= opts.delta_floor)) {
    throw DomainError("elliptic source below floor: min f=" + num(fmin) + " < delta_floor=" + num(opts.delta_floor));
  }
  if (!std::isfinite(fmax)) throw DomainError("elliptic source is not finite");

  const auto& g = f.grid;
  Eigen::VectorXd phi = Eigen::VectorXd::Constant(g.M(), std::log(f.values.mean()));
  EllipticSolveResult result{EvenField(g, phi), 0, 0.0, opts.scheme};

  if (opts.scheme == EllipticScheme::newton) {
    for (int it = 0;; ++it) {
      const Eigen::VectorXd r = f.values - hb_apply(EvenField(g, phi)).values;
      const double res = r.cwiseAbs().maxCoeff();
      // Below this level the residual is roundoff in the 1/h^2 stencil.
      const double floor =
          16.0 * std::numeric_limits<double>::epsilon() * (4.0 * phi.cwiseAbs().maxCoeff() / (g.h() * g.h()) + fmax);
      if (res <= std::max(opts.tol, floor)) {
        result.iterations = it;
        result.final_residual = res;
        break;
      }
      if (it >= opts.max_iterations) {
        throw NonConvergenceError("Newton for H^{-1} did not converge: residual " + num(res) + " after " +
                                      std::to_string(it) + " iterations",
                                  res, it);
      }
      phi += solve_shifted_laplacian(g, phi.array().exp().matrix(), r);
    }
  } else {
    const Eigen::VectorXd rhs = f.values.array() - 1.0;
    for (int it = 1;; ++it) {
      Eigen::VectorXd k(g.M());
      for (int j = 0; j < g.M(); ++j) k[j] = k_factor(phi[j]);
      Eigen::VectorXd next = solve_shifted_laplacian(g, k, rhs);
      const double increment = (next - phi).cwiseAbs().maxCoeff();
      phi = std::move(next);
      if (increment <= opts.tol) {
        result.iterations = it;
        break;
      }
      if (it >= opts.max_iterations) {
        const double res = sup_residual(EvenField(g, phi), f);
        throw NonConvergenceError("k(phi) fixed point did not converge: increment " + num(increment) +
                                      ", residual " + num(res) + " after " + std::to_string(it) + " iterations",
                                  res, it);
      }
    }
    result.final_residual = sup_residual(EvenField(g, phi), f);
  }

  result.phi = EvenField(g, std::move(phi));

  const double tol_mp = 10.0 * opts.tol;
  const double lo = std::log(fmin) - tol_mp;
  const double hi = std::log(fmax) + tol_mp;
  if (result.phi.values.minCoeff() < lo || result.phi.values.maxCoeff() > hi) {
    throw ContractError("maximum principle violated: phi in [" + num(result.phi.values.minCoeff()) + ", " +
                        num(result.phi.values.maxCoeff()) + "] outside [" + num(lo) + ", " + num(hi) + "]");
  }
  return result;
}

MonotoneTransportReport validate_monotone_transport(double lambda, const EvenField& h) {
  const auto& g = h.grid;
  const double scale = 1.0 + h.values.cwiseAbs().maxCoeff();
  if (h.evenness_defect() > 1e-12 * scale) {
    throw ContractError("monotone transport needs an even source, evenness defect " + num(h.evenness_defect()));
  }
  if (h.values.maxCoeff() - h.values.minCoeff() <= 1e-14 * scale) {
    throw ContractError("monotone transport needs a non-constant source");
  }
  for (int j = 0; j < g.crest(); ++j) {
    if (h.values[j + 1] - h.values[j] < -1e-14 * scale) {
      throw ContractError("monotone transport needs a source non-decreasing on (-L/2, 0); fails at x=" +
                          num(g.x(j)));
    }
  }

  const EvenField phi = helmholtz_inverse(lambda, h);
  MonotoneTransportReport report;
  report.increasing_inside = true;
  for (int j = 0; j < g.crest(); ++j) {
    if (!(phi.values[j + 1] - phi.values[j] > 0.0)) {
      report.increasing_inside = false;
      report.witness = j;
      break;
    }
  }
  const Eigen::VectorXd d2 = periodic_second_difference(phi.values, g.h());
  report.crest_curvature = d2[g.crest()];
  report.trough_curvature = d2[g.trough()];
  report.concave_at_crest = report.crest_curvature < 0.0;
  report.convex_at_trough = report.trough_curvature > 0.0;
  return report;
}

}  // namespace epw
