#pragma once

#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "epw/branch_continuation.hpp"
#include "epw/pressure.hpp"

namespace epw::cli {

struct PressureSpec {
  std::string family = "power";  // power | log | inverse | custom
  double gamma = 2.0;
  double kappa = 0.5;
  std::vector<std::pair<double, double>> terms;  // custom: (coef, exponent), exponent 0 is log

  PressureLaw build() const;
};

struct AdmissibilitySampling {
  double xi_min = 1e-3;
  double xi_max = 1e3;
  int n_samples = 400;
  double delta = 0.5;
};

struct RunConfig {
  PressureSpec pressure;
  double L = 6.283185307179586;
  int grid_M = 1024;
  std::string output_dir = ".";
  double elliptic_tol = 1e-10;
  std::string elliptic_scheme = "newton";
  AdmissibilitySampling admissibility;
  ContinuationConfig continuation;  // its M mirrors grid_M

  void validate() const;
};

/// Parses a config document; unknown keys and invalid values throw ValidationError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);

/// Parses "power:gamma=2,kappa=0.5", "log:kappa=1", "inverse:kappa=1",
/// "custom:terms=1^2;0.5^0" or a JSON object.
PressureSpec parse_pressure(const std::string& text);

/// Applies "a.b=value" to a config document; value is read as JSON when it parses, else as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

nlohmann::json checkpoint_to_json(const RunConfig& cfg, const ContinuationState& s);
std::pair<RunConfig, ContinuationState> checkpoint_from_json(const nlohmann::json& j);

/// Entry point of the epwave tool; returns the process exit status
/// (0 ok, 1 validation error, 2 non-convergence, 3 monitor violation).
int run_cli(int argc, char** argv);

}  // namespace epw::cli
