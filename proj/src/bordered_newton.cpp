#include "bordered_newton.hpp"

#include <Eigen/SparseLU>
#include <cmath>

#include "epw/errors.hpp"
#include "epw/pb_solver.hpp"

namespace epw::detail {

BorderedNewtonResult bordered_newton(const PressureLaw& p, const TorusGrid& g, double c, Eigen::VectorXd f,
                                     const SideFn& side, const BorderedNewtonOptions& opts) {
  const int m = g.M();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  EllipticOptions eopts;
  eopts.tol = opts.wave.elliptic_tol;
  eopts.delta_floor = opts.wave.delta_floor;

  BorderedNewtonResult out;
  for (int it = 0;; ++it) {
    Eigen::VectorXd phi;
    SideCondition e;
    Eigen::VectorXd r;
    try {
      if (!f.allFinite() || !std::isfinite(c)) break;
      phi = hb_invert(EvenField(g, f), eopts).phi.values;
      r = local_part(p, c, f) + phi;
      e = side(c, f);
    } catch (const Error&) {
      break;
    }
    out.c = c;
    out.f = f;
    out.iterations = it;
    out.residual = std::max(r.cwiseAbs().maxCoeff(), std::abs(e.value));
    if (out.residual <= opts.tol) {
      out.converged = true;
      break;
    }
    if (it >= opts.max_iterations) break;

    const Eigen::VectorXd slope = local_slope(p, c, f);
    const Eigen::VectorXd dfdc = c * (f.array().square().inverse() - 1.0).matrix();

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(9 * m + 2));
    for (int j = 0; j < m; ++j) {
      t.emplace_back(j, j, slope[j]);
      t.emplace_back(j, m + j, 1.0);
      if (dfdc[j] != 0.0) t.emplace_back(j, 2 * m, dfdc[j]);
      t.emplace_back(m + j, j, -1.0);
      t.emplace_back(m + j, m + j, 2.0 * inv_h2 + std::exp(phi[j]));
      t.emplace_back(m + j, m + (j + 1) % m, -inv_h2);
      t.emplace_back(m + j, m + (j + m - 1) % m, -inv_h2);
      if (e.grad_f[j] != 0.0) t.emplace_back(2 * m, j, e.grad_f[j]);
    }
    if (e.grad_c != 0.0) t.emplace_back(2 * m, 2 * m, e.grad_c);
    Eigen::SparseMatrix<double> a(2 * m + 1, 2 * m + 1);
    a.setFromTriplets(t.begin(), t.end());

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * m + 1);
    rhs.head(m) = -r;
    rhs[2 * m] = -e.value;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) break;
    const Eigen::VectorXd step = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !step.allFinite()) break;
    f = even_part(g, f + step.head(m));
    c += step[2 * m];
  }
  return out;
}

}  // namespace epw::detail
