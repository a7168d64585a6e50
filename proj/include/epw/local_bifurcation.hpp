#pragma once

#include <array>
#include <vector>

#include "epw/pressure.hpp"
#include "epw/torus_field.hpp"
#include "epw/wave_system.hpp"

namespace epw {

/// Second-order data of the bifurcation from (c0, 1) along cos(alpha x).
struct LocalBifData {
  double c0 = 0.0;
  double alpha = 0.0;
  double A_coef = 0.0;      // constant part of d2F(xi0, xi0)
  double B_coef = 0.0;      // cos(2 alpha x) part of d2F(xi0, xi0)
  double A_tilde = 0.0;     // A / mu_0
  double B_tilde = 0.0;     // B / mu_2
  double cubic_term = 0.0;  // mode-1 coefficient of d3F(xi0, xi0, xi0)
  double psi2_operator = 0.0;
  double psi2_poly = 0.0;
  std::array<double, 9> a_coeffs{};
};

/// All pieces of the closed-form assembly, with L^{-1} acting on mode k as
/// division by its eigenvalue mu_k.
LocalBifData local_bifurcation_data(const PressureLaw& p, double L);

/// Psi''(0) from the closed-form Frechet-derivative assembly.
double psi2_operator(const PressureLaw& p, double L);

/// Mode-1 coefficient of d2F(c0, 1)(xi0, xi0); identically zero, hence Psi'(0) = 0.
double psi1_numerator(const PressureLaw& p, double L);

struct Psi2Polynomial {
  double value = 0.0;
  std::array<double, 9> coeffs{};  // a_0 .. a_8 in powers of alpha^2
};

/// Degree-8 polynomial in alpha^2 with closed-form coefficients in
/// p'(1), p''(1), p'''(1).
Psi2Polynomial psi2_polynomial(const PressureLaw& p, double L);
std::array<double, 9> psi2_polynomial_coefficients(double p1, double p2, double p3);

/// The same vanishing condition when L^{-1} multiplies by mu_k instead of
/// dividing, scaled by 4 (1 + a^2)^5 (1 + 4 a^2)^3. Equals psi2_polynomial
/// identically; kept to document which convention the coefficients encode.
double psi2_multiplied_convention(const PressureLaw& p, double L);

/// Positive real roots z of sum coeffs[n] z^n on (0, z_max], found by a
/// log-grid sign scan refined by bisection. Even-multiplicity roots are not
/// detected.
std::vector<double> positive_polynomial_roots(const std::array<double, 9>& coeffs, double z_max = 1e6,
                                              double z_min = 1e-8);

/// Periods L = 2 pi / sqrt(z) at the positive roots of psi2_polynomial, sorted.
std::vector<double> exceptional_periods(const PressureLaw& p);
std::vector<double> periods_from_roots(const std::vector<double>& roots);

struct FrechetOptions {
  int M = 1024;  // the fine grid is 2M
  double eps2 = 1e-2;  // step for second directional differences
  double eps3 = 4e-2;  // step for third directional differences
  double elliptic_tol = 1e-11;
};

struct Psi2FiniteDifference {
  double psi2 = 0.0;
  double cubic_term = 0.0;     // mode-1 coefficient of d3F(xi0, xi0, xi0)
  double quadratic_term = 0.0; // mode-1 coefficient of d2F(xi0, L^{-1}(I-P) d2F(xi0, xi0))
  double transversality = 0.0; // mode-1 coefficient of d_c d_f F xi0
  double psi1_numerator = 0.0; // mode-1 coefficient of d2F(xi0, xi0)
};

/// Psi''(0) rebuilt from Richardson-extrapolated directional differences of
/// the discrete residual at (c0, 1); the inverse on the complement of the
/// kernel is a bordered sparse solve. Independent of the closed form.
Psi2FiniteDifference psi2_finite_difference(const PressureLaw& p, double L, const FrechetOptions& opts = {});

struct SmallAmplitudeOptions {
  int M = 1024;
  double tol = 1e-10;
  double s_max = 0.2;
  int max_iterations = 30;
  WaveOptions wave{};
};

struct SmallAmplitudeWave {
  WaveState state;
  double c0 = 0.0;  // discrete bifurcation speed
  int newton_iterations = 0;
};

/// Newton-corrected point of the local branch with cos-amplitude s, solving
/// {F(c, f) = 0, cosine_coefficient(f - 1, 1) = s} from (c0, 1 + s cos(alpha x)).
SmallAmplitudeWave small_amplitude_wave(const PressureLaw& p, double L, double s,
                                        const SmallAmplitudeOptions& opts = {});

}  // namespace epw
