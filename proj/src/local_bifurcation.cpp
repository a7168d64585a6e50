#include "epw/local_bifurcation.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "bordered_newton.hpp"
#include "epw/errors.hpp"
#include "format.hpp"

namespace epw {

using detail::num;

LocalBifData local_bifurcation_data(const PressureLaw& p, double L) {
  if (!(L > 0.0)) throw DomainError("period must be positive, got L=" + num(L));
  LocalBifData d;
  d.alpha = 2.0 * std::numbers::pi / L;
  const double z = d.alpha * d.alpha;
  const double p2 = p.d2p(1.0), p3 = p.d3p(1.0);
  d.c0 = dispersion_speed(p, L, 1);
  const double c02 = d.c0 * d.c0;

  const double q1 = 1.0 / (1.0 + z);         // symbol of (1 - D2)^{-1} on mode 1
  const double q2 = 1.0 / (1.0 + 4.0 * z);   // ... on mode 2
  const double local2 = 0.5 * (3.0 * c02 + p2);
  d.A_coef = local2 - 0.5 * q1 * q1;
  d.B_coef = local2 - 0.5 * q1 * q1 * q2;

  // L = d_f F(c0, 1) acts on mode k as mu_k = 1/(1 + k^2 a^2) - 1/(1 + a^2).
  const double mu0 = 1.0 - q1;
  const double mu2 = q2 - q1;
  if (std::abs(mu0) < 1e-300 || std::abs(mu2) < 1e-300) {
    throw DegeneratePeriodError("mode eigenvalue vanishes for L=" + num(L));
  }
  d.A_tilde = d.A_coef / mu0;
  d.B_tilde = d.B_coef / mu2;

  const double q1_4 = q1 * q1 * q1 * q1;
  d.cubic_term = 0.75 * (-12.0 * c02 + p3) + 0.75 * q1_4 + 0.75 * q1_4 * q2;
  const double numerator = -d.cubic_term / 3.0 + (2.0 * d.A_coef * d.A_tilde + d.B_coef * d.B_tilde);
  d.psi2_operator = numerator / (-2.0 * d.c0);

  const auto poly = psi2_polynomial(p, L);
  d.psi2_poly = poly.value;
  d.a_coeffs = poly.coeffs;
  return d;
}

double psi2_operator(const PressureLaw& p, double L) { return local_bifurcation_data(p, L).psi2_operator; }

double psi1_numerator(const PressureLaw& p, double L) {
  // d2F(xi0, xi0) = A + B cos(2 alpha x) has no cos(alpha x) component.
  (void)p;
  if (!(L > 0.0)) throw DomainError("period must be positive, got L=" + num(L));
  return 0.0;
}

std::array<double, 9> psi2_polynomial_coefficients(double p1, double p2, double p3) {
  const double p11 = p1 * p1, p12 = p1 * p2, p22 = p2 * p2;
  return {
      12 * p1 - p3 + 10,
      -9 * p11 - 6 * p12 - p22 + 192 * p1 - 4 * p2 - 17 * p3 + 166,
      -36 * p11 - 24 * p12 - 4 * p22 + 1302 * p1 - 38 * p2 - 118 * p3 + 1080,
      378 * p11 + 252 * p12 + 42 * p22 + 5304 * p1 + 32 * p2 - 434 * p3 + 3727,
      2844 * p11 + 1896 * p12 + 316 * p22 + 13986 * p1 + 962 * p2 - 925 * p3 + 7852,
      7191 * p11 + 4794 * p12 + 799 * p22 + 21564 * p1 + 2464 * p2 - 1181 * p3 + 9024,
      8640 * p11 + 5760 * p12 + 960 * p22 + 17712 * p1 + 2336 * p2 - 892 * p3 + 4800,
      5040 * p11 + 3360 * p12 + 560 * p22 + 6720 * p1 + 768 * p2 - 368 * p3 + 768,
      1152 * p11 + 768 * p12 + 128 * p22 + 768 * p1 - 64 * p3,
  };
}

namespace {

double horner(const std::array<double, 9>& a, double z) {
  double v = 0.0;
  for (int n = 8; n >= 0; --n) v = v * z + a[static_cast<std::size_t>(n)];
  return v;
}

}  // namespace

Psi2Polynomial psi2_polynomial(const PressureLaw& p, double L) {
  if (!(L > 0.0)) throw DomainError("period must be positive, got L=" + num(L));
  Psi2Polynomial out;
  out.coeffs = psi2_polynomial_coefficients(p.dp(1.0), p.d2p(1.0), p.d3p(1.0));
  const double alpha = 2.0 * std::numbers::pi / L;
  out.value = horner(out.coeffs, alpha * alpha);
  return out;
}

double psi2_multiplied_convention(const PressureLaw& p, double L) {
  const auto d = local_bifurcation_data(p, L);
  const double z = d.alpha * d.alpha;
  const double q1 = 1.0 / (1.0 + z), q2 = 1.0 / (1.0 + 4.0 * z);
  const double mu0 = 1.0 - q1, mu2 = q2 - q1;
  const double c02 = d.c0 * d.c0;
  const double q1_4 = q1 * q1 * q1 * q1;
  const double condition = 2.0 * d.A_coef * d.A_coef * mu0 + d.B_coef * d.B_coef * mu2 +
                           (3.0 * c02 - 0.25 * p.d3p(1.0)) - 0.25 * q1_4 - 0.25 * q1_4 * q2;
  return 4.0 * std::pow(1.0 + z, 5) * std::pow(1.0 + 4.0 * z, 3) * condition;
}

std::vector<double> positive_polynomial_roots(const std::array<double, 9>& coeffs, double z_max, double z_min) {
  constexpr int kScan = 4000;
  std::vector<double> roots;
  const double llo = std::log(z_min), lhi = std::log(z_max);
  double z_prev = z_min;
  double v_prev = horner(coeffs, z_prev);
  if (v_prev == 0.0) roots.push_back(z_prev);
  for (int i = 1; i <= kScan; ++i) {
    const double z = std::exp(llo + (lhi - llo) * i / kScan);
    const double v = horner(coeffs, z);
    if (v == 0.0) {
      roots.push_back(z);
    } else if (v_prev != 0.0 && (v < 0.0) != (v_prev < 0.0)) {
      double lo = z_prev, hi = z, vlo = v_prev;
      while (hi - lo > 1e-10 * hi) {
        const double mid = 0.5 * (lo + hi);
        const double vm = horner(coeffs, mid);
        if (vm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((vm < 0.0) == (vlo < 0.0)) {
          lo = mid;
          vlo = vm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    z_prev = z;
    v_prev = v;
  }
  return roots;
}

std::vector<double> periods_from_roots(const std::vector<double>& roots) {
  std::vector<double> periods;
  periods.reserve(roots.size());
  for (double z : roots) periods.push_back(2.0 * std::numbers::pi / std::sqrt(z));
  std::sort(periods.begin(), periods.end());
  return periods;
}

std::vector<double> exceptional_periods(const PressureLaw& p) {
  const auto coeffs = psi2_polynomial_coefficients(p.dp(1.0), p.d2p(1.0), p.d3p(1.0));
  return periods_from_roots(positive_polynomial_roots(coeffs));
}

namespace {

// Two Romberg levels for a symmetric stencil with error in even powers of eps.
template <class Fn>
auto romberg(Fn&& d, double eps) {
  using V = decltype(d(eps));
  const V a = d(eps), b = d(0.5 * eps), c = d(0.25 * eps);
  const V r1 = (4.0 * b - a) / 3.0, r2 = (4.0 * c - b) / 3.0;
  return V((16.0 * r2 - r1) / 15.0);
}

struct FrechetProbe {
  const PressureLaw& p;
  TorusGrid grid;
  double c0;
  WaveOptions wave;
  Eigen::VectorXd xi0;

  Eigen::VectorXd F(double c, const Eigen::VectorXd& f) const {
    return residual(p, c, EvenField(grid, f), wave).values;
  }
  Eigen::VectorXd at(double t, const Eigen::VectorXd& dir) const {
    return F(c0, Eigen::VectorXd::Ones(grid.M()) + t * dir);
  }
  double mode1(const Eigen::VectorXd& v) const { return cosine_coefficient(grid, v, 1); }

  // Second directional derivative along dir.
  Eigen::VectorXd second(const Eigen::VectorXd& dir, double eps) const {
    auto d2 = [&](double e) { return Eigen::VectorXd((at(e, dir) + at(-e, dir) - 2.0 * at(0.0, dir)) / (e * e)); };
    return romberg(d2, eps);
  }
  Eigen::VectorXd third(const Eigen::VectorXd& dir, double eps) const {
    auto d3 = [&](double e) {
      return Eigen::VectorXd((at(2 * e, dir) - 2.0 * at(e, dir) + 2.0 * at(-e, dir) - at(-2 * e, dir)) /
                             (2.0 * e * e * e));
    };
    return romberg(d3, eps);
  }
  // d2F(u, v) by polarization, with both directions scaled to unit sup norm
  // so the probes stay inside the domain.
  Eigen::VectorXd mixed(const Eigen::VectorXd& u_in, const Eigen::VectorXd& v_in, double eps) const {
    const double su = u_in.cwiseAbs().maxCoeff(), sv = v_in.cwiseAbs().maxCoeff();
    if (su == 0.0 || sv == 0.0) return Eigen::VectorXd::Zero(u_in.size());
    const Eigen::VectorXd u = u_in / su, v = v_in / sv;
    auto d = [&](double e) {
      return Eigen::VectorXd((at(e, u + v) - at(e, u - v) - at(-e, u - v) + at(-e, u + v)) / (4.0 * e * e));
    };
    return su * sv * romberg(d, eps);
  }
  // Solves d_f F(c0, 1) w = g with <w, xi0> = 0 by a bordered sparse system.
  Eigen::VectorXd complement_inverse(const Eigen::VectorXd& g) const {
    const int m = grid.M();
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    const double diag = p.dp(1.0) - c0 * c0;
    std::vector<Eigen::Triplet<double>> t;
    for (int j = 0; j < m; ++j) {
      t.emplace_back(j, j, diag);
      t.emplace_back(j, m + j, 1.0);
      t.emplace_back(j, 2 * m, xi0[j]);
      t.emplace_back(m + j, j, -1.0);
      t.emplace_back(m + j, m + j, 2.0 * inv_h2 + 1.0);
      t.emplace_back(m + j, m + (j + 1) % m, -inv_h2);
      t.emplace_back(m + j, m + (j + m - 1) % m, -inv_h2);
      t.emplace_back(2 * m, j, xi0[j] * grid.h());
    }
    Eigen::SparseMatrix<double> a(2 * m + 1, 2 * m + 1);
    a.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * m + 1);
    rhs.head(m) = g;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a);
    if (lu.info() != Eigen::Success) throw NonConvergenceError("bordered factorization failed", 0.0, 0);
    return lu.solve(rhs).head(m);
  }
};

Psi2FiniteDifference psi2_fd_on_grid(const PressureLaw& p, double L, int M, const FrechetOptions& opts) {
  TorusGrid grid(L, M);
  WaveOptions wave;
  wave.elliptic_tol = opts.elliptic_tol;
  FrechetProbe probe{p, grid, discrete_dispersion_speed(p, grid, 1), wave, cosine_mode(grid, 1)};

  Psi2FiniteDifference out;
  const Eigen::VectorXd d2 = probe.second(probe.xi0, opts.eps2);
  out.psi1_numerator = probe.mode1(d2);
  const Eigen::VectorXd complement = d2 - out.psi1_numerator * probe.xi0;
  const Eigen::VectorXd w = probe.complement_inverse(complement);
  out.quadratic_term = probe.mode1(probe.mixed(probe.xi0, w, opts.eps2));
  out.cubic_term = probe.mode1(probe.third(probe.xi0, opts.eps3));

  // d_c d_f F xi0 by a centered cross difference in (c, f); F is quadratic in c.
  const double ec = 1e-2 * probe.c0;
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(M);
  auto cross = [&](double ef) {
    return probe.mode1((probe.F(probe.c0 + ec, one + ef * probe.xi0) - probe.F(probe.c0 + ec, one - ef * probe.xi0) -
                        probe.F(probe.c0 - ec, one + ef * probe.xi0) + probe.F(probe.c0 - ec, one - ef * probe.xi0)) /
                       (4.0 * ec * ef));
  };
  out.transversality = romberg(cross, opts.eps2);
  out.psi2 = (-out.cubic_term / 3.0 + out.quadratic_term) / out.transversality;
  return out;
}

}  // namespace

Psi2FiniteDifference psi2_finite_difference(const PressureLaw& p, double L, const FrechetOptions& opts) {
  // Two grids and a Richardson step in h remove the O(h^2) discretization error.
  const auto coarse = psi2_fd_on_grid(p, L, opts.M, opts);
  const auto fine = psi2_fd_on_grid(p, L, 2 * opts.M, opts);
  auto extrapolate = [](double a, double b) { return (4.0 * b - a) / 3.0; };
  Psi2FiniteDifference out;
  out.cubic_term = extrapolate(coarse.cubic_term, fine.cubic_term);
  out.quadratic_term = extrapolate(coarse.quadratic_term, fine.quadratic_term);
  out.transversality = extrapolate(coarse.transversality, fine.transversality);
  out.psi1_numerator = extrapolate(coarse.psi1_numerator, fine.psi1_numerator);
  out.psi2 = (-out.cubic_term / 3.0 + out.quadratic_term) / out.transversality;
  return out;
}

SmallAmplitudeWave small_amplitude_wave(const PressureLaw& p, double L, double s, const SmallAmplitudeOptions& opts) {
  if (!(s >= 0.0)) throw DomainError("local-chart amplitude must be >= 0, got s=" + num(s));
  if (s > opts.s_max) {
    throw StepTooLargeError("amplitude s=" + num(s) + " exceeds the local chart limit s_max=" + num(opts.s_max) +
                            "; use branch continuation instead");
  }
  for (double bad : exceptional_periods(p)) {
    if (std::abs(bad - L) <= 1e-6) {
      throw DegeneratePeriodError("period L=" + num(L) + " is an exceptional period (" + num(bad) + ")");
    }
  }
  TorusGrid grid(L, opts.M);
  const double c0 = discrete_dispersion_speed(p, grid, 1);
  const Eigen::VectorXd xi0 = cosine_mode(grid, 1);

  SmallAmplitudeWave out{make_wave_state(p, c0, EvenField::constant(grid, 1.0), opts.wave), c0, 0};
  if (s == 0.0) return out;

  const Eigen::VectorXd grad = (2.0 / L) * grid.h() * xi0;
  detail::SideFn side = [&](double, const Eigen::VectorXd& f) {
    return detail::SideCondition{cosine_coefficient(grid, f.array() - 1.0, 1) - s, grad, 0.0};
  };
  detail::BorderedNewtonOptions nopts{opts.tol, opts.max_iterations, opts.wave};
  auto sol = detail::bordered_newton(p, grid, c0, Eigen::VectorXd::Ones(grid.M()) + s * xi0, side, nopts);
  if (!sol.converged) {
    throw NonConvergenceError("local-chart Newton failed at s=" + num(s) + ", residual " + num(sol.residual),
                              sol.residual, sol.iterations);
  }
  out.state = make_wave_state(p, sol.c, EvenField(grid, std::move(sol.f)), opts.wave);
  out.newton_iterations = sol.iterations;
  return out;
}

}  // namespace epw
