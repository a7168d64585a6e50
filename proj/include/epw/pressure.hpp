#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace epw {

/// Pressure profile p together with its first three derivatives.
///
/// The whole traveling-wave problem is parametrized by p; p''' is only
/// needed by the second-order bifurcation coefficient. Instances are
/// immutable after construction and safe to share between threads.
class PressureLaw {
 public:
  using Fn = std::function<double(double)>;

  PressureLaw(Fn p, Fn dp, Fn d2p, Fn d3p, std::string label);

  /// Power law: p(r) = g k/(g-1) r^(g-1), and k log r when g = 1.
  static PressureLaw power(double gamma, double kappa);
  /// p(r) = k log r (the g = 1 member of the power family).
  static PressureLaw logarithmic(double kappa);
  /// Inverse law: p(r) = -k / r.
  static PressureLaw inverse(double kappa);
  /// p(r) = k r^2, used throughout the bifurcation tests.
  static PressureLaw quadratic(double kappa);
  /// Sum of terms coef * r^exponent; exponent 0 stands for coef * log r.
  static PressureLaw monomial_sum(std::vector<std::pair<double, double>> terms);

  double p(double xi) const { return p_(xi); }
  double dp(double xi) const { return dp_(xi); }
  double d2p(double xi) const { return d2p_(xi); }
  double d3p(double xi) const { return d3p_(xi); }
  const std::string& label() const { return label_; }

 private:
  Fn p_, dp_, d2p_, d3p_;
  std::string label_;
};

struct AdmissibilityCheck {
  std::string name;
  bool passed = false;
  std::optional<double> witness;  // first failing sample
};

struct AdmissibilityReport {
  std::pair<double, double> sample_range;
  double delta = 0.5;
  std::vector<AdmissibilityCheck> checks;
  std::vector<std::pair<double, double>> w_trend;  // (xi, W_delta(xi)) over the top decade

  bool passed() const;
};

/// Checks the admissibility conditions on n_samples log-spaced points of
/// [xi_min, xi_max]: p' > 0, 3p' + xi p'' > 0, xi^3 p' decaying toward
/// xi_min, and W_delta increasing over the top decade.
AdmissibilityReport validate_admissibility(const PressureLaw& p, double xi_min, double xi_max,
                                           int n_samples, double delta = 0.5);

/// Unique root of xi^3 p'(xi) = c^2.
double a_star(const PressureLaw& p, double c, double rtol = 1e-12);

/// G_c(xi) = c^2/2 (xi^-2 - 1) + p(xi) - p(1) and its derivatives up to order 3.
double g_c(const PressureLaw& p, double c, double xi, int order = 0);

/// W_delta(xi); the running maximum of p' over [delta, xi] is taken on a
/// log-spaced scan of n_scan points.
double w_delta(const PressureLaw& p, double delta, double xi, int n_scan = 64);

}  // namespace epw
