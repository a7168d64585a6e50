#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "epw/errors.hpp"
#include "epw/local_bifurcation.hpp"

using namespace epw;

namespace {

constexpr double kPi = std::numbers::pi;
const PressureLaw linear = PressureLaw::power(2.0, 0.5);

// Psi''(0) rebuilt from the perturbation expansion of H^{-1} about phi = 0.
// With K = (1 - D2)^{-1} and phi1 = K h:
//   D2 H^{-1}(h, h) = -K (phi1^2),  D3 H^{-1}(h, h, h) = 3 K(phi1 K(phi1^2)) - K(phi1^3).
// Everything is tracked on cosine modes 0, 1, 2.
double psi2_by_modes(double p1, double p2, double p3, double L) {
  const double a = 2 * kPi / L;
  auto K = [&](int k) { return 1.0 / (1.0 + k * k * a * a); };
  const double v = K(1);
  const double c2 = p1 + v;
  const double g2 = 3 * c2 + p2, g3 = -12 * c2 + p3;  // G''(1), G'''(1) at c0
  auto mu = [&](int k) { return p1 - c2 + K(k); };

  // D2F(xi0, xi0): cos^2 = 1/2 + cos(2x)/2.
  const double m0 = 0.5 * g2 - 0.5 * v * v * K(0);
  const double m2 = 0.5 * g2 - 0.5 * v * v * K(2);
  const double w0 = m0 / mu(0), w2 = m2 / mu(2);
  // Mode 1 of D2F(xi0, w) = G'' xi0 w - K(K xi0 K w).
  const double q = g2 * (w0 + 0.5 * w2) - v * v * (K(0) * w0 + 0.5 * K(2) * w2);
  // Mode 1 of D3F(xi0, xi0, xi0); cos^3 has mode-1 weight 3/4.
  const double v4 = v * v * v * v;
  const double t = 0.75 * g3 + 3.0 * v4 * (0.5 + 0.25 * K(2)) - 0.75 * v4;
  return (-t / 3.0 + q) / (-2.0 * std::sqrt(c2));
}

}  // namespace

TEST(Psi2, LinearLawReference) {
  // p = rho, L = 2 pi: alpha = 1, c0^2 = 3/2.
  const auto d = local_bifurcation_data(linear, 2 * kPi);
  EXPECT_NEAR(d.c0, std::sqrt(1.5), 1e-15);
  EXPECT_NEAR(d.A_coef, 0.5 * 4.5 - 0.125, 1e-14);
  EXPECT_NEAR(d.B_coef, 0.5 * 4.5 - 0.125 / 5.0, 1e-14);
  EXPECT_NEAR(d.A_tilde, d.A_coef / 0.5, 1e-14);
  EXPECT_NEAR(d.B_tilde, d.B_coef / (0.2 - 0.5), 1e-14);
  EXPECT_NEAR(d.psi2_operator, -2.4665000882, 1e-9);
}

TEST(Psi2, ClosedFormMatchesModeByModeOracle) {
  for (double kappa : {0.25, 1.0, 3.0}) {
    for (double L : {1.0, 2 * kPi, 20.0}) {
      const auto p = PressureLaw::quadratic(kappa);
      const double oracle = psi2_by_modes(2 * kappa, 2 * kappa, 0.0, L);
      EXPECT_NEAR(psi2_operator(p, L), oracle, 1e-10 * std::max(1.0, std::abs(oracle)))
          << "kappa=" << kappa << " L=" << L;
    }
  }
}

TEST(Psi2, FirstDerivativeVanishes) {
  EXPECT_EQ(psi1_numerator(linear, 2 * kPi), 0.0);
  FrechetOptions o;
  o.M = 256;
  const auto fd = psi2_finite_difference(linear, 2 * kPi, o);
  EXPECT_LT(std::abs(fd.psi1_numerator), 1e-9);
}

TEST(Psi2, FiniteDifferenceRouteAgrees) {
  const auto fd = psi2_finite_difference(linear, 2 * kPi);
  const double closed = psi2_operator(linear, 2 * kPi);
  EXPECT_NEAR(fd.psi2 / closed, 1.0, 1e-6);
  EXPECT_NEAR(fd.transversality, -2 * std::sqrt(1.5), 1e-8);
}

TEST(Psi2Polynomial, KappaRhoSquaredCoefficients) {
  for (double kappa : {0.5, 1.0, 2.0, 6.0}) {
    const auto a = psi2_polynomial_coefficients(2 * kappa, 2 * kappa, 0.0);
    EXPECT_DOUBLE_EQ(a[1], -64 * kappa * kappa + 376 * kappa + 166);
    EXPECT_DOUBLE_EQ(a[2], -256 * kappa * kappa + 2528 * kappa + 1080);
    for (double c : a) EXPECT_GT(c, 0.0) << "kappa=" << kappa;
  }
  EXPECT_EQ(psi2_polynomial_coefficients(1.0, 0.0, 0.0)[0], 22.0);
}

TEST(Psi2Polynomial, EqualsMultipliedConvention) {
  for (double kappa : {0.3, 1.0, 4.0}) {
    for (double L : {0.7, 2 * kPi, 30.0}) {
      const auto p = PressureLaw::quadratic(kappa);
      const double poly = psi2_polynomial(p, L).value;
      EXPECT_NEAR(psi2_multiplied_convention(p, L), poly, 1e-9 * std::abs(poly));
    }
  }
}

TEST(ExceptionalPeriods, EmptyForUnitKappa) {
  EXPECT_TRUE(exceptional_periods(PressureLaw::quadratic(1.0)).empty());
}

TEST(ExceptionalPeriods, InjectedRoot) {
  // (z - 0.25)(z + 1) = z^2 + 0.75 z - 0.25 has the single positive root 1/4.
  std::array<double, 9> a{-0.25, 0.75, 1.0, 0, 0, 0, 0, 0, 0};
  const auto roots = positive_polynomial_roots(a);
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_NEAR(roots[0], 0.25, 1e-10);
  const auto periods = periods_from_roots(roots);
  EXPECT_NEAR(periods[0], 4 * kPi, 1e-8);
}

TEST(ExceptionalPeriods, AtMostEight) {
  // Roots at 1..8 (scaled to keep the coefficients moderate).
  std::array<double, 9> a{};
  a[0] = 1.0;
  for (int r = 1; r <= 8; ++r) {
    std::array<double, 9> b{};
    for (int n = 0; n < 8; ++n) {
      b[static_cast<std::size_t>(n + 1)] += a[static_cast<std::size_t>(n)];
      b[static_cast<std::size_t>(n)] -= r * a[static_cast<std::size_t>(n)];
    }
    a = b;
  }
  const auto roots = positive_polynomial_roots(a);
  ASSERT_EQ(roots.size(), 8u);
  for (int r = 1; r <= 8; ++r) EXPECT_NEAR(roots[static_cast<std::size_t>(r - 1)], r, 1e-8 * r);
  for (double kappa : {0.1, 1.0, 10.0, 50.0}) EXPECT_LE(exceptional_periods(PressureLaw::quadratic(kappa)).size(), 8u);
}

TEST(SmallAmplitude, ZeroAmplitudeIsTheBifurcationPoint) {
  SmallAmplitudeOptions o;
  o.M = 256;
  const auto w = small_amplitude_wave(linear, 2 * kPi, 0.0, o);
  EXPECT_EQ(w.newton_iterations, 0);
  EXPECT_EQ(w.state.c, w.c0);
  EXPECT_EQ((w.state.f.values.array() - 1.0).abs().maxCoeff(), 0.0);
}

TEST(SmallAmplitude, Errors) {
  SmallAmplitudeOptions o;
  o.M = 128;
  EXPECT_THROW(small_amplitude_wave(linear, 2 * kPi, 0.3, o), StepTooLargeError);
  EXPECT_THROW(small_amplitude_wave(linear, 2 * kPi, -0.01, o), DomainError);
}

TEST(SmallAmplitude, PinsTheCosineAmplitude) {
  SmallAmplitudeOptions o;
  o.M = 512;
  const auto w = small_amplitude_wave(linear, 2 * kPi, 0.03, o);
  EXPECT_NEAR(cosine_coefficient(w.state.f, 1) - cosine_coefficient(EvenField::constant(w.state.f.grid, 1.0), 1),
              0.03, 1e-10);
  EXPECT_LT(w.state.c, w.c0);  // Psi''(0) < 0 for this law
  EXPECT_LE(w.state.diagnostics.residual_sup, 1e-9);
}
