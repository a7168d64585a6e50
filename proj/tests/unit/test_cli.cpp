#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "epw/cli.hpp"
#include "epw/errors.hpp"

using namespace epw;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "epwave");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("epw_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const auto c = cli::config_from_json(json::object());
  EXPECT_EQ(c.pressure.family, "power");
  EXPECT_EQ(c.continuation.M, c.grid_M);
  const auto back = cli::config_from_json(cli::config_to_json(c));
  EXPECT_EQ(cli::config_to_json(back), cli::config_to_json(c));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(cli::config_from_json(json{{"gridM", 64}}), ValidationError);
  EXPECT_THROW(cli::config_from_json(json{{"continuation", {{"dsinit", 0.1}}}}), ValidationError);
  EXPECT_THROW(cli::config_from_json(json{{"L", -1.0}}), ValidationError);
  EXPECT_THROW(cli::config_from_json(json{{"grid_M", "many"}}), ValidationError);
  EXPECT_THROW(cli::config_from_json(json{{"pressure", {{"family", "ideal"}}}}), ValidationError);
  EXPECT_THROW(cli::config_from_json(json{{"elliptic_scheme", "multigrid"}}), ValidationError);
}

TEST(Config, PressureSpecs) {
  EXPECT_EQ(cli::parse_pressure("power:gamma=3,kappa=2").build().dp(1.0), 6.0);
  EXPECT_EQ(cli::parse_pressure("inverse:kappa=1").family, "inverse");
  EXPECT_EQ(cli::parse_pressure("log:kappa=2").build().dp(2.0), 1.0);
  const auto custom = cli::parse_pressure("custom:terms=1^2;0.5^0");
  ASSERT_EQ(custom.terms.size(), 2u);
  EXPECT_DOUBLE_EQ(custom.build().dp(1.0), 2.5);
  EXPECT_EQ(cli::parse_pressure(R"({"family":"power","gamma":2,"kappa":0.5})").build().dp(3.0), 1.0);
  EXPECT_THROW(cli::parse_pressure("power:gamma=x"), ValidationError);
  EXPECT_THROW(cli::parse_pressure("custom:terms=1"), ValidationError);
}

TEST(Config, Overrides) {
  json j = json::object();
  cli::apply_override(j, "continuation.max_steps=3");
  cli::apply_override(j, "elliptic_scheme=k_fixed_point");
  EXPECT_EQ(j["continuation"]["max_steps"], 3);
  EXPECT_EQ(j["elliptic_scheme"], "k_fixed_point");
  EXPECT_EQ(cli::config_from_json(j).continuation.max_steps, 3);
  EXPECT_THROW(cli::apply_override(j, "novalue"), ValidationError);
}

TEST(Cli, CheckPressure) {
  const auto out = scratch("check");
  EXPECT_EQ(run({"check-pressure", "--output-dir", out.string()}), 0);
  EXPECT_TRUE(load(out / "admissibility.json")["passed"].get<bool>());
  EXPECT_EQ(run({"check-pressure", "--pressure", "custom:terms=-1^1", "--output-dir", out.string()}), 1);
  EXPECT_FALSE(load(out / "admissibility.json")["passed"].get<bool>());
}

TEST(Cli, BifurcationPoint) {
  const auto out = scratch("bif");
  EXPECT_EQ(run({"bifurcation-point", "--output-dir", out.string(), "--grid-M", "256"}), 0);
  const auto j = load(out / "bifurcation_point.json");
  EXPECT_NEAR(j["c0_continuum"].get<double>(), 1.224744871391589, 1e-15);
  EXPECT_LT(j["kernel_residual_sup"].get<double>(), 1e-8);
}

TEST(Cli, ValidationErrorsExitOne) {
  const auto out = scratch("bad");
  EXPECT_EQ(run({"bifurcation-point", "--set", "bogus=1", "--output-dir", out.string()}), 1);
  EXPECT_EQ(run({"bifurcation-point", "--L", "-2", "--output-dir", out.string()}), 1);
  EXPECT_EQ(run({"no-such-command"}), 1);
  EXPECT_EQ(run({"bifurcation-point", "--config", (out / "missing.json").string()}), 1);
  EXPECT_EQ(run({"solve-elliptic", "--input", (out / "missing.csv").string(), "--output-dir", out.string()}), 1);
}

TEST(Cli, SolveElliptic) {
  const auto out = scratch("ell");
  const TorusGrid g(6.0, 128);
  const auto f = EvenField::sample(g, [](double x) { return 1.0 + 0.4 * std::cos(x * 2 * 3.141592653589793 / 6.0); });
  write_field_csv(out / "f.csv", f, "f");
  EXPECT_EQ(run({"solve-elliptic", "--input", (out / "f.csv").string(), "--output-dir", out.string()}), 0);
  const auto phi = read_field_csv(out / "phi.csv");
  const auto back = hb_apply(phi);
  EXPECT_LT((back.values - f.values).cwiseAbs().maxCoeff(), 1e-9);
  const auto j = load(out / "elliptic.json");
  EXPECT_LE(j["phi_max"].get<double>(), j["log_max_f"].get<double>() + 1e-12);
  EXPECT_GE(j["phi_min"].get<double>(), j["log_min_f"].get<double>() - 1e-12);
  // A source below the floor is a validation error.
  write_field_csv(out / "low.csv", EvenField::constant(g, 1e-6), "f");
  EXPECT_EQ(run({"solve-elliptic", "--input", (out / "low.csv").string(), "--output-dir", out.string()}), 1);
}

TEST(Cli, Psi2ReportsBothConventions) {
  const auto out = scratch("psi2");
  EXPECT_EQ(run({"psi2", "--output-dir", out.string()}), 0);
  const auto j = load(out / "psi2.json");
  EXPECT_NEAR(j["psi2_operator"].get<double>(), -2.4665000882, 1e-9);
  EXPECT_EQ(j["a_coeffs"].size(), 9u);
  EXPECT_EQ(j["a_coeffs"][0].get<double>(), 22.0);
  EXPECT_EQ(j["operator_convention"], "divided");
  EXPECT_EQ(j["polynomial_convention"], "multiplied");
  EXPECT_TRUE(j["exceptional_periods"].is_array());
}

TEST(Cli, TraceResumeAndDeterminism) {
  const auto out = scratch("trace");
  const auto again = scratch("trace_again");
  EXPECT_EQ(run({"trace-branch", "--grid-M", "256", "--output-dir", out.string()}), 0);
  EXPECT_EQ(load(out / "branch_summary.json")["stop_reason"], "touched");
  // Same config, different directory: only the recorded output_dir may differ.
  EXPECT_EQ(run({"trace-branch", "--grid-M", "256", "--output-dir", again.string()}), 0);
  for (const char* f : {"branch.csv", "branch_summary.json", "profile_seed.csv", "profile_last.csv"}) {
    EXPECT_EQ(slurp(out / f), slurp(again / f)) << f;
  }

  const auto resumed = scratch("resume");
  EXPECT_EQ(run({"resume", "--checkpoint", (out / "checkpoints" / "step_0002.json").string(), "--output-dir",
                 resumed.string()}),
            0);
  std::stringstream full(slurp(out / "branch.csv")), tail(slurp(resumed / "branch_resumed.csv"));
  std::string line;
  std::vector<std::string> a, b;
  while (std::getline(full, line)) a.push_back(line);
  while (std::getline(tail, line)) b.push_back(line);
  ASSERT_GE(a.size(), 4u);
  ASSERT_EQ(b.size() + 3, a.size());  // header + seed + two steps precede the resumed rows
  for (std::size_t i = 1; i < b.size(); ++i) EXPECT_EQ(a[i + 3], b[i]);
}

TEST(Cli, MaxStepsIsNotAnError) {
  const auto out = scratch("maxsteps");
  EXPECT_EQ(run({"trace-branch", "--grid-M", "128", "--set", "continuation.max_steps=1", "--output-dir",
                 out.string()}),
            0);
  EXPECT_EQ(load(out / "branch_summary.json")["stop_reason"], "max_steps");
}
