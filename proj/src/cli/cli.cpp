#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "epw/branch_continuation.hpp"
#include "epw/cli.hpp"
#include "epw/errors.hpp"
#include "epw/local_bifurcation.hpp"
#include "epw/pb_solver.hpp"
#include "format.hpp"

namespace epw::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;
using detail::num;

namespace {

struct Invocation {
  RunConfig cfg;
  fs::path out;
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

// Writes the report and echoes it on stdout.
void emit(const fs::path& path, const json& j) {
  write_json(path, j);
  std::cout << j.dump(2) << "\n";
}

json check_json(const PropertyCheck& c) {
  json j{{"name", c.name}, {"passed", c.passed}, {"asserted", c.asserted}, {"value", c.value}};
  j["witness"] = c.witness ? json(*c.witness) : json(nullptr);
  return j;
}

void write_profile(const fs::path& path, const WaveState& s) {
  write_columns_csv(path, {"x", "f", "phi"}, {s.f.grid.nodes(), s.f.values, s.phi.values});
}

void write_branch_csv(const fs::path& path, const std::vector<BranchPoint>& pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  std::vector<Eigen::VectorXd> cols(9, Eigen::VectorXd(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = pts[static_cast<std::size_t>(i)];
    cols[0][i] = pt.s_arc;
    cols[1][i] = pt.state.c;
    cols[2][i] = pt.amplitude;
    cols[3][i] = pt.state.diagnostics.min_f;
    cols[4][i] = pt.state.diagnostics.max_f;
    cols[5][i] = pt.gap;
    cols[6][i] = pt.crest_slope;
    cols[7][i] = pt.state.diagnostics.residual_sup;
    cols[8][i] = pt.newton_iters;
  }
  write_columns_csv(path,
                    {"s_arc", "c", "amplitude", "min_f", "max_f", "gap", "crest_slope", "residual", "newton_iters"},
                    cols);
}

int cmd_check_pressure(const Invocation& inv) {
  const auto p = inv.cfg.pressure.build();
  const auto& a = inv.cfg.admissibility;
  const auto r = validate_admissibility(p, a.xi_min, a.xi_max, a.n_samples, a.delta);
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"witness", c.witness ? json(*c.witness) : json(nullptr)}});
  }
  json trend = json::array();
  for (const auto& [xi, w] : r.w_trend) trend.push_back({xi, w});
  emit(inv.out / "admissibility.json", {{"pressure", p.label()},
                                         {"sample_range", {r.sample_range.first, r.sample_range.second}},
                                         {"delta", r.delta},
                                         {"checks", checks},
                                         {"w_trend", trend},
                                         {"passed", r.passed()}});
  if (!r.passed()) {
    std::cerr << "error: pressure law " << p.label() << " fails admissibility\n";
    return 1;
  }
  return 0;
}

int cmd_bifurcation_point(const Invocation& inv) {
  const auto p = inv.cfg.pressure.build();
  const TorusGrid g(inv.cfg.L, inv.cfg.grid_M);
  const double c0 = dispersion_speed(p, inv.cfg.L, 1);
  const double c0d = discrete_dispersion_speed(p, g, 1);
  WaveOptions w;
  w.elliptic_tol = inv.cfg.elliptic_tol;
  const auto state = make_wave_state(p, c0d, EvenField::constant(g, 1.0), w);
  const auto kernel = jacobian_apply(p, state, EvenField(g, cosine_mode(g, 1)));
  // d_f F(c0, 1) is diagonal on cosines with eigenvalue p'(1) - c0^2 + 1/(1 + lambda_k).
  double smallest = std::numeric_limits<double>::infinity();
  int smallest_k = -1;
  for (int k = 0; k <= g.M() / 2; ++k) {
    if (k == 1) continue;
    const double mu = std::abs(p.dp(1.0) - c0d * c0d + 1.0 / (1.0 + g.symbol(k)));
    if (mu < smallest) {
      smallest = mu;
      smallest_k = k;
    }
  }
  emit(inv.out / "bifurcation_point.json", {{"pressure", p.label()},
                                             {"L", inv.cfg.L},
                                             {"M", g.M()},
                                             {"alpha", 2.0 * std::numbers::pi / inv.cfg.L},
                                             {"dp1", p.dp(1.0)},
                                             {"c0_continuum", c0},
                                             {"c0_discrete", c0d},
                                             {"a_star_c0", a_star(p, c0)},
                                             {"kernel_residual_sup", kernel.values.cwiseAbs().maxCoeff()},
                                             {"smallest_nonzero_mode_eigenvalue", smallest},
                                             {"smallest_nonzero_mode", smallest_k}});
  return 0;
}

int cmd_solve_elliptic(const Invocation& inv, const std::string& input) {
  const EvenField f = read_field_csv(input);
  EllipticOptions eo;
  eo.tol = inv.cfg.elliptic_tol;
  eo.scheme = elliptic_scheme_from_string(inv.cfg.elliptic_scheme);
  eo.delta_floor = inv.cfg.continuation.delta_floor;
  const auto r = hb_invert(f, eo);
  const fs::path phi_path = inv.out / "phi.csv";
  write_field_csv(phi_path, r.phi, "phi");
  const double lo = std::log(f.values.minCoeff()), hi = std::log(f.values.maxCoeff());
  emit(inv.out / "elliptic.json", {{"input", input},
                                   {"L", f.grid.L()},
                                   {"M", f.grid.M()},
                                   {"scheme", to_string(r.scheme)},
                                   {"iterations", r.iterations},
                                   {"final_residual", r.final_residual},
                                   {"phi_min", r.phi.values.minCoeff()},
                                   {"phi_max", r.phi.values.maxCoeff()},
                                   {"log_min_f", lo},
                                   {"log_max_f", hi}});
  return 0;
}

int cmd_psi2(const Invocation& inv) {
  const auto p = inv.cfg.pressure.build();
  const auto d = local_bifurcation_data(p, inv.cfg.L);
  const auto fd = psi2_finite_difference(p, inv.cfg.L);
  emit(inv.out / "psi2.json",
       {{"pressure", p.label()},
        {"L", inv.cfg.L},
        {"c0", d.c0},
        {"alpha", d.alpha},
        {"A", d.A_coef},
        {"B", d.B_coef},
        {"A_tilde", d.A_tilde},
        {"B_tilde", d.B_tilde},
        {"cubic_term", d.cubic_term},
        {"psi1_numerator", psi1_numerator(p, inv.cfg.L)},
        {"psi2_operator", d.psi2_operator},
        {"psi2_finite_difference", fd.psi2},
        {"psi2_poly", d.psi2_poly},
        {"psi2_poly_multiplied_form", psi2_multiplied_convention(p, inv.cfg.L)},
        {"a_coeffs", d.a_coeffs},
        {"exceptional_periods", exceptional_periods(p)},
        {"operator_convention", "divided"},
        {"polynomial_convention", "multiplied"},
        {"convention_note",
         "psi2_operator applies the inverse of the linearization by dividing by its mode eigenvalues; the polynomial "
         "a_0..a_8 coincide with the form that multiplies by them, so zeros and signs of psi2_poly need not match "
         "psi2_operator"}});
  return 0;
}

json branch_summary(const Branch& b) {
  json violations = json::array();
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    for (const auto& c : b.points[i].monitors.checks) {
      if (c.asserted && !c.passed) violations.push_back({{"point", i}, {"check", check_json(c)}});
    }
  }
  return json{{"stop_reason", to_string(b.stop_reason)},
              {"points", b.points.size()},
              {"c0", b.c0},
              {"tol_touch", b.tol_touch},
              {"c_cap", b.c_cap},
              {"curvature_margin", b.curvature_margin},
              {"theta_extrapolated", b.theta_extrapolated ? json(*b.theta_extrapolated) : json(nullptr)},
              {"final_c", b.points.empty() ? json(nullptr) : json(b.points.back().state.c)},
              {"final_gap", b.points.empty() ? json(nullptr) : json(b.points.back().gap)},
              {"monitor_violations", violations}};
}

StepCallback checkpointer(const Invocation& inv) {
  fs::create_directories(inv.out / "checkpoints");
  return [&inv](const ContinuationState& s, const BranchPoint&) {
    char name[32];
    std::snprintf(name, sizeof name, "step_%04d.json", s.steps);
    const json j = checkpoint_to_json(inv.cfg, s);
    write_json(inv.out / "checkpoints" / name, j);
    write_json(inv.out / "checkpoint.json", j);
  };
}

int branch_status(const Branch& b) {
  if (b.stop_reason == StopReason::monitor_violation) {
    std::cerr << "error: monitor violation at branch point " << b.points.size() - 1 << "\n";
    return 3;
  }
  if (b.stop_reason == StopReason::step_underflow) {
    std::cerr << "error: continuation step fell below ds_min\n";
    return 2;
  }
  return 0;
}

int finish_branch(const Invocation& inv, const Branch& b, const std::vector<BranchPoint>& rows, const char* csv,
                  const char* summary) {
  write_branch_csv(inv.out / csv, rows);
  if (!b.points.empty()) write_profile(inv.out / "profile_last.csv", b.points.back().state);
  emit(inv.out / summary, branch_summary(b));
  return branch_status(b);
}

int cmd_trace_branch(const Invocation& inv) {
  const auto p = inv.cfg.pressure.build();
  const Branch b = trace_branch(p, inv.cfg.L, inv.cfg.continuation, checkpointer(inv));
  write_profile(inv.out / "profile_seed.csv", b.points.front().state);
  return finish_branch(inv, b, b.points, "branch.csv", "branch_summary.json");
}

int cmd_resume(Invocation inv, const std::string& checkpoint, bool out_overridden) {
  auto [cfg, state] = checkpoint_from_json(read_json_file(checkpoint));
  if (!out_overridden) cfg.output_dir = inv.cfg.output_dir;
  inv.cfg = cfg;
  const auto p = inv.cfg.pressure.build();
  const Branch b = resume_branch(p, inv.cfg.L, inv.cfg.continuation, state, checkpointer(inv));
  // The first point restates the checkpoint; only new rows are written.
  const std::vector<BranchPoint> rows(b.points.begin() + 1, b.points.end());
  return finish_branch(inv, b, rows, "branch_resumed.csv", "branch_resumed_summary.json");
}

int cmd_limit_wave(const Invocation& inv) {
  const auto p = inv.cfg.pressure.build();
  const Branch b = trace_branch(p, inv.cfg.L, inv.cfg.continuation);
  write_branch_csv(inv.out / "branch.csv", b.points);
  if (b.stop_reason != StopReason::touched) {
    std::cerr << "error: branch stopped with " << to_string(b.stop_reason) << " before touching\n";
    emit(inv.out / "branch_summary.json", branch_summary(b));
    return b.stop_reason == StopReason::monitor_violation ? 3 : 2;
  }
  const auto lw = solve_limit_wave(p, inv.cfg.L, b, inv.cfg.continuation);
  write_profile(inv.out / "limit_profile.csv", lw.state);
  const auto hd = holder_diagnostics(lw.state.f);
  json checks = json::array();
  for (const auto& c : lw.checks) checks.push_back(check_json(c));
  emit(inv.out / "limit_wave.json", {{"pressure", p.label()},
                                     {"L", inv.cfg.L},
                                     {"M", inv.cfg.grid_M},
                                     {"c", lw.state.c},
                                     {"a_star", lw.state.a_star_c},
                                     {"crest_value", lw.state.f.crest_value()},
                                     {"newton_iterations", lw.newton_iterations},
                                     {"crest_slope", lw.crest_slope},
                                     {"slope_fit_intercept", lw.slope_intercept},
                                     {"slope_fit_linear", lw.slope_linear_coef},
                                     {"theta", lw.theta},
                                     {"theta_potential", lw.theta_potential},
                                     {"crest_slope_relative_error", lw.crest_slope / lw.theta - 1.0},
                                     {"theta_extrapolated", b.theta_extrapolated ? json(*b.theta_extrapolated) : json(nullptr)},
                                     {"lipschitz_seminorm", hd.lipschitz},
                                     {"half_holder_seminorm", hd.half_holder},
                                     {"checks", checks},
                                     {"passed", lw.passed()}});
  if (!lw.passed()) {
    std::cerr << "error: limit wave fails its post-checks\n";
    return 3;
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Periodic traveling waves of the Euler-Poisson system", "epwave"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, output_dir, pressure_text, input, checkpoint;
  std::vector<std::string> sets;
  std::optional<int> grid_M;
  std::optional<double> L;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--set", sets, "Override a config field, key=value (dotted keys for nested fields)");
  app.add_option("--output-dir", output_dir, "Directory for output files");
  app.add_option("--grid-M", grid_M, "Grid size M");
  app.add_option("--pressure", pressure_text, "Pressure law, e.g. power:gamma=2,kappa=0.5");
  app.add_option("--L", L, "Period");

  auto* check = app.add_subcommand("check-pressure", "Admissibility report");
  auto* bif = app.add_subcommand("bifurcation-point", "Bifurcation speed and kernel data");
  auto* ell = app.add_subcommand("solve-elliptic", "phi = H^{-1}(f) for a sampled f");
  ell->add_option("--input", input, "CSV with columns x, f")->required();
  auto* psi = app.add_subcommand("psi2", "Second-order bifurcation coefficient");
  auto* trace = app.add_subcommand("trace-branch", "Continue the branch up to touching");
  auto* limit = app.add_subcommand("limit-wave", "Trace, then solve for the corner wave");
  auto* resume = app.add_subcommand("resume", "Continue a branch from a checkpoint");
  resume->add_option("--checkpoint", checkpoint, "Checkpoint JSON written by trace-branch")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    json doc = config_path.empty() ? json::object() : read_json_file(config_path);
    for (const auto& s : sets) apply_override(doc, s);
    if (!output_dir.empty()) doc["output_dir"] = output_dir;
    if (grid_M) doc["grid_M"] = *grid_M;
    if (L) doc["L"] = *L;
    RunConfig cfg = config_from_json(doc);
    if (!pressure_text.empty()) cfg.pressure = parse_pressure(pressure_text);
    Invocation inv{cfg, fs::path(cfg.output_dir)};
    fs::create_directories(inv.out);

    if (check->parsed()) return cmd_check_pressure(inv);
    if (bif->parsed()) return cmd_bifurcation_point(inv);
    if (ell->parsed()) return cmd_solve_elliptic(inv, input);
    if (psi->parsed()) return cmd_psi2(inv);
    if (trace->parsed()) return cmd_trace_branch(inv);
    if (limit->parsed()) return cmd_limit_wave(inv);
    if (resume->parsed()) return cmd_resume(inv, checkpoint, output_dir.empty());
  } catch (const NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const MonitorViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace epw::cli
