#include "epw/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epw/errors.hpp"
#include "format.hpp"

namespace epw {

using detail::num;

PressureLaw::PressureLaw(Fn p, Fn dp, Fn d2p, Fn d3p, std::string label)
    : p_(std::move(p)), dp_(std::move(dp)), d2p_(std::move(d2p)), d3p_(std::move(d3p)),
      label_(std::move(label)) {}

PressureLaw PressureLaw::power(double gamma, double kappa) {
  if (!(gamma > 0.0) || !(kappa > 0.0)) {
    throw DomainError("power pressure law needs gamma > 0 and kappa > 0, got gamma=" + num(gamma) +
                      " kappa=" + num(kappa));
  }
  std::string label = "power(gamma=" + num(gamma) + ",kappa=" + num(kappa) + ")";
  if (gamma == 1.0) {
    auto law = logarithmic(kappa);
    return PressureLaw([law](double r) { return law.p(r); }, [law](double r) { return law.dp(r); },
                       [law](double r) { return law.d2p(r); }, [law](double r) { return law.d3p(r); },
                       label);
  }
  const double a = gamma * kappa / (gamma - 1.0);
  const double e = gamma - 1.0;
  return PressureLaw([a, e](double r) { return a * std::pow(r, e); },
                     [a, e](double r) { return a * e * std::pow(r, e - 1.0); },
                     [a, e](double r) { return a * e * (e - 1.0) * std::pow(r, e - 2.0); },
                     [a, e](double r) { return a * e * (e - 1.0) * (e - 2.0) * std::pow(r, e - 3.0); },
                     label);
}

PressureLaw PressureLaw::logarithmic(double kappa) {
  if (!(kappa > 0.0)) throw DomainError("log pressure law needs kappa > 0, got " + num(kappa));
  return PressureLaw([kappa](double r) { return kappa * std::log(r); },
                     [kappa](double r) { return kappa / r; },
                     [kappa](double r) { return -kappa / (r * r); },
                     [kappa](double r) { return 2.0 * kappa / (r * r * r); },
                     "log(kappa=" + num(kappa) + ")");
}

PressureLaw PressureLaw::inverse(double kappa) {
  if (!(kappa > 0.0)) throw DomainError("inverse pressure law needs kappa > 0, got " + num(kappa));
  return PressureLaw([kappa](double r) { return -kappa / r; },
                     [kappa](double r) { return kappa / (r * r); },
                     [kappa](double r) { return -2.0 * kappa / (r * r * r); },
                     [kappa](double r) { return 6.0 * kappa / (r * r * r * r); },
                     "inverse(kappa=" + num(kappa) + ")");
}

PressureLaw PressureLaw::quadratic(double kappa) {
  auto law = monomial_sum({{kappa, 2.0}});
  return PressureLaw([law](double r) { return law.p(r); }, [law](double r) { return law.dp(r); },
                     [law](double r) { return law.d2p(r); }, [law](double r) { return law.d3p(r); },
                     "quadratic(kappa=" + num(kappa) + ")");
}

PressureLaw PressureLaw::monomial_sum(std::vector<std::pair<double, double>> terms) {
  if (terms.empty()) throw DomainError("custom pressure law needs at least one term");
  auto eval = [terms](double r, int order) {
    double sum = 0.0;
    for (const auto& [coef, e] : terms) {
      if (e == 0.0) {
        // coef * log r
        switch (order) {
          case 0: sum += coef * std::log(r); break;
          case 1: sum += coef / r; break;
          case 2: sum += -coef / (r * r); break;
          default: sum += 2.0 * coef / (r * r * r); break;
        }
        continue;
      }
      double factor = coef;
      for (int k = 0; k < order; ++k) factor *= (e - k);
      if (factor != 0.0) sum += factor * std::pow(r, e - order);
    }
    return sum;
  };
  std::string label = "custom(";
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) label += "+";
    label += num(terms[i].first) + (terms[i].second == 0.0 ? "*log" : "*r^" + num(terms[i].second));
  }
  label += ")";
  return PressureLaw([eval](double r) { return eval(r, 0); }, [eval](double r) { return eval(r, 1); },
                     [eval](double r) { return eval(r, 2); }, [eval](double r) { return eval(r, 3); },
                     label);
}

bool AdmissibilityReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

namespace {

std::vector<double> log_space(double lo, double hi, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i) {
    xs[static_cast<std::size_t>(i)] = n == 1 ? lo : std::exp(llo + (lhi - llo) * i / (n - 1));
  }
  xs.front() = lo;
  xs.back() = hi;
  return xs;
}

double checked(double v, const char* what, double xi) {
  if (!std::isfinite(v)) {
    throw EvaluationError(std::string("non-finite ") + what + " at xi=" + num(xi));
  }
  return v;
}

}  // namespace

AdmissibilityReport validate_admissibility(const PressureLaw& p, double xi_min, double xi_max,
                                           int n_samples, double delta) {
  if (!(xi_min > 0.0 && xi_min < 1.0 && xi_max > 1.0)) {
    throw DomainError("admissibility range must satisfy 0 < xi_min < 1 < xi_max, got [" +
                      num(xi_min) + ", " + num(xi_max) + "]");
  }
  if (n_samples < 16) throw DomainError("admissibility needs n_samples >= 16, got " + std::to_string(n_samples));
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1), got " + num(delta));

  AdmissibilityReport report;
  report.sample_range = {xi_min, xi_max};
  report.delta = delta;

  const auto xs = log_space(xi_min, xi_max, n_samples);
  std::vector<double> dp(xs.size()), d2p(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    checked(p.p(xs[i]), "p", xs[i]);
    dp[i] = checked(p.dp(xs[i]), "p'", xs[i]);
    d2p[i] = checked(p.d2p(xs[i]), "p''", xs[i]);
  }

  AdmissibilityCheck positive{"dp_positive", true, std::nullopt};
  AdmissibilityCheck convex{"three_dp_plus_xi_d2p_positive", true, std::nullopt};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (positive.passed && !(dp[i] > 0.0)) {
      positive.passed = false;
      positive.witness = xs[i];
    }
    if (convex.passed && !(3.0 * dp[i] + xs[i] * d2p[i] > 0.0)) {
      convex.passed = false;
      convex.witness = xs[i];
    }
  }

  // xi^3 p'(xi) must shrink monotonically over the bottom decade and sit
  // well below its value at xi = 1.
  AdmissibilityCheck vanishing{"xi3_dp_vanishes_at_zero", true, std::nullopt};
  {
    const double bottom_top = std::min(10.0 * xi_min, 1.0);
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size() && xs[i] <= bottom_top; ++i) {
      const double q = xs[i] * xs[i] * xs[i] * dp[i];
      if (!(q > prev)) {
        vanishing.passed = false;
        vanishing.witness = xs[i];
        break;
      }
      prev = q;
    }
    const double q_min = xi_min * xi_min * xi_min * dp.front();
    const double q_one = checked(p.dp(1.0), "p'", 1.0);
    if (vanishing.passed && !(q_min <= 0.5 * q_one)) {
      vanishing.passed = false;
      vanishing.witness = xi_min;
    }
  }

  AdmissibilityCheck growth{"w_delta_increasing", true, std::nullopt};
  {
    const double top_bottom = std::max(xi_max / 10.0, delta);
    double prev = -std::numeric_limits<double>::infinity();
    for (double xi : xs) {
      if (xi < top_bottom) continue;
      // W_delta is undefined when max p' = -1; that is a failure, not an evaluation error.
      const double w = w_delta(p, delta, xi);
      if (std::isfinite(w)) report.w_trend.emplace_back(xi, w);
      if (growth.passed && !(w > prev)) {
        growth.passed = false;
        growth.witness = xi;
      }
      prev = w;
    }
    if (report.w_trend.size() < 2) {
      growth.passed = false;
      growth.witness = xi_max;
    }
  }

  report.checks = {positive, convex, vanishing, growth};
  return report;
}

double a_star(const PressureLaw& p, double c, double rtol) {
  if (c == 0.0 || !std::isfinite(c)) throw DomainError("a_star needs a finite nonzero speed, got c=" + num(c));
  const double target = c * c;
  auto q = [&p](double xi) { return xi * xi * xi * p.dp(xi); };
  auto dq = [&p](double xi) { return xi * xi * (3.0 * p.dp(xi) + xi * p.d2p(xi)); };

  constexpr double kBound = 1152921504606846976.0;  // 2^60
  double lo = 1.0, hi = 1.0;
  if (q(1.0) < target) {
    while (q(hi) < target) {
      lo = hi;
      hi *= 2.0;
      if (hi > kBound) throw UnboundedSearchError("a_star bracket exceeded 2^60 for c=" + num(c) + " (inadmissible p?)");
    }
  } else {
    while (q(lo) > target) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1.0 / kBound) throw UnboundedSearchError("a_star bracket fell below 2^-60 for c=" + num(c) + " (inadmissible p?)");
    }
  }

  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double r = q(x) - target;
    if (std::abs(r) <= 1e-3 * rtol * target) return x;
    if (r > 0.0) hi = x; else lo = x;
    const double d = dq(x);
    double next = d > 0.0 ? x - r / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      x = next;
      break;
    }
    x = next;
  }
  if (!(std::abs(q(x) - target) <= rtol * target)) {
    throw NonConvergenceError("a_star did not reach rtol for c=" + num(c), std::abs(q(x) - target), 200);
  }
  return x;
}

double g_c(const PressureLaw& p, double c, double xi, int order) {
  if (!(xi > 0.0)) throw DomainError("G_c needs xi > 0, got xi=" + num(xi));
  const double c2 = c * c;
  switch (order) {
    case 0: return 0.5 * c2 * (1.0 / (xi * xi) - 1.0) + p.p(xi) - p.p(1.0);
    case 1: return -c2 / (xi * xi * xi) + p.dp(xi);
    case 2: return 3.0 * c2 / (xi * xi * xi * xi) + p.d2p(xi);
    case 3: return -12.0 * c2 / (xi * xi * xi * xi * xi) + p.d3p(xi);
    default: throw DomainError("G_c derivative order must be 0..3, got " + std::to_string(order));
  }
}

double w_delta(const PressureLaw& p, double delta, double xi, int n_scan) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("W_delta needs delta in (0,1), got " + num(delta));
  if (!(xi >= delta)) throw DomainError("W_delta needs xi >= delta, got xi=" + num(xi));
  double running_max = -std::numeric_limits<double>::infinity();
  for (double eta : log_space(delta, xi, xi > delta ? std::max(n_scan, 2) : 1)) {
    running_max = std::max(running_max, p.dp(eta));
  }
  const double numerator = xi * xi * xi * xi * p.dp(xi) - 2.0 * xi * (p.p(xi) - p.p(1.0)) -
                           2.0 * xi * std::log(xi);
  return numerator / (running_max + 1.0);
}

}  // namespace epw
