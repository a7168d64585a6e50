#include <cstdio>
#include <sstream>

#include "epw/cli.hpp"
#include "epw/errors.hpp"
#include "format.hpp"

namespace epw::cli {

using json = nlohmann::json;
using detail::num;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ValidationError("unknown key '" + where + (where.empty() ? "" : ".") + k + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("bad value for '" + where + (where.empty() ? "" : ".") + key + "': " + j.at(key).dump());
  }
}

ContinuationConfig continuation_from_json(const json& j, ContinuationConfig c) {
  const std::string w = "continuation";
  reject_unknown(j,
                 {"tol_newton", "elliptic_tol", "ds_init", "ds_min", "ds_max", "tol_touch_rel", "max_steps",
                  "delta_floor", "c_cap_factor", "amplitude_floor", "curvature_margin_rel", "lipschitz_cap", "s_seed",
                  "max_newton_iter", "theta_fit_points"},
                 w);
  read(j, "tol_newton", c.tol_newton, w);
  read(j, "elliptic_tol", c.elliptic_tol, w);
  read(j, "ds_init", c.ds_init, w);
  read(j, "ds_min", c.ds_min, w);
  read(j, "ds_max", c.ds_max, w);
  read(j, "tol_touch_rel", c.tol_touch_rel, w);
  read(j, "max_steps", c.max_steps, w);
  read(j, "delta_floor", c.delta_floor, w);
  read(j, "c_cap_factor", c.c_cap_factor, w);
  read(j, "amplitude_floor", c.amplitude_floor, w);
  read(j, "curvature_margin_rel", c.curvature_margin_rel, w);
  read(j, "lipschitz_cap", c.lipschitz_cap, w);
  read(j, "s_seed", c.s_seed, w);
  read(j, "max_newton_iter", c.max_newton_iter, w);
  read(j, "theta_fit_points", c.theta_fit_points, w);
  return c;
}

json continuation_to_json(const ContinuationConfig& c) {
  return json{{"tol_newton", c.tol_newton},
              {"elliptic_tol", c.elliptic_tol},
              {"ds_init", c.ds_init},
              {"ds_min", c.ds_min},
              {"ds_max", c.ds_max},
              {"tol_touch_rel", c.tol_touch_rel},
              {"max_steps", c.max_steps},
              {"delta_floor", c.delta_floor},
              {"c_cap_factor", c.c_cap_factor},
              {"amplitude_floor", c.amplitude_floor},
              {"curvature_margin_rel", c.curvature_margin_rel},
              {"lipschitz_cap", c.lipschitz_cap},
              {"s_seed", c.s_seed},
              {"max_newton_iter", c.max_newton_iter},
              {"theta_fit_points", c.theta_fit_points}};
}

PressureSpec pressure_from_json(const json& j) {
  PressureSpec p;
  reject_unknown(j, {"family", "gamma", "kappa", "terms"}, "pressure");
  read(j, "family", p.family, "pressure");
  read(j, "gamma", p.gamma, "pressure");
  read(j, "kappa", p.kappa, "pressure");
  read(j, "terms", p.terms, "pressure");
  if (p.family != "power" && p.family != "log" && p.family != "inverse" && p.family != "custom") {
    throw ValidationError("pressure.family must be power, log, inverse or custom, got '" + p.family + "'");
  }
  if (p.family == "custom" && p.terms.empty()) throw ValidationError("pressure.terms must be non-empty for custom");
  if (p.family != "custom" && !(p.kappa > 0.0)) throw ValidationError("pressure.kappa must be positive, got " + num(p.kappa));
  if (p.family == "power" && !(p.gamma >= 1.0)) throw ValidationError("pressure.gamma must be >= 1, got " + num(p.gamma));
  return p;
}

json pressure_to_json(const PressureSpec& p) {
  json j{{"family", p.family}};
  if (p.family == "custom") {
    j["terms"] = p.terms;
  } else {
    j["kappa"] = p.kappa;
    if (p.family == "power") j["gamma"] = p.gamma;
  }
  return j;
}

}  // namespace

PressureLaw PressureSpec::build() const {
  if (family == "power") return PressureLaw::power(gamma, kappa);
  if (family == "log") return PressureLaw::logarithmic(kappa);
  if (family == "inverse") return PressureLaw::inverse(kappa);
  if (family == "custom") return PressureLaw::monomial_sum(terms);
  throw ValidationError("unknown pressure family '" + family + "'");
}

void RunConfig::validate() const {
  if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("L must be positive, got " + num(L));
  if (grid_M < 32 || grid_M % 2 != 0) throw ValidationError("grid_M must be even and >= 32, got " + std::to_string(grid_M));
  if (!(elliptic_tol > 0.0)) throw ValidationError("elliptic_tol must be positive, got " + num(elliptic_tol));
  (void)elliptic_scheme_from_string(elliptic_scheme);
  if (!(admissibility.xi_min > 0.0 && admissibility.xi_min < admissibility.xi_max)) {
    throw ValidationError("admissibility needs 0 < xi_min < xi_max, got " + num(admissibility.xi_min) + ", " +
                          num(admissibility.xi_max));
  }
  if (admissibility.n_samples < 10) {
    throw ValidationError("admissibility.n_samples must be >= 10, got " + std::to_string(admissibility.n_samples));
  }
  if (!(admissibility.delta > 0.0)) throw ValidationError("admissibility.delta must be positive, got " + num(admissibility.delta));
  continuation.validate();
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  reject_unknown(j,
                 {"pressure", "L", "grid_M", "output_dir", "elliptic_tol", "elliptic_scheme", "admissibility",
                  "continuation"},
                 "");
  if (j.contains("pressure")) c.pressure = pressure_from_json(j.at("pressure"));
  read(j, "L", c.L, "");
  read(j, "grid_M", c.grid_M, "");
  read(j, "output_dir", c.output_dir, "");
  read(j, "elliptic_tol", c.elliptic_tol, "");
  read(j, "elliptic_scheme", c.elliptic_scheme, "");
  if (j.contains("admissibility")) {
    const auto& a = j.at("admissibility");
    reject_unknown(a, {"xi_min", "xi_max", "n_samples", "delta"}, "admissibility");
    read(a, "xi_min", c.admissibility.xi_min, "admissibility");
    read(a, "xi_max", c.admissibility.xi_max, "admissibility");
    read(a, "n_samples", c.admissibility.n_samples, "admissibility");
    read(a, "delta", c.admissibility.delta, "admissibility");
  }
  if (j.contains("continuation")) c.continuation = continuation_from_json(j.at("continuation"), c.continuation);
  c.continuation.M = c.grid_M;
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  return json{{"pressure", pressure_to_json(c.pressure)},
              {"L", c.L},
              {"grid_M", c.grid_M},
              {"output_dir", c.output_dir},
              {"elliptic_tol", c.elliptic_tol},
              {"elliptic_scheme", c.elliptic_scheme},
              {"admissibility",
               {{"xi_min", c.admissibility.xi_min},
                {"xi_max", c.admissibility.xi_max},
                {"n_samples", c.admissibility.n_samples},
                {"delta", c.admissibility.delta}}},
              {"continuation", continuation_to_json(c.continuation)}};
}

PressureSpec parse_pressure(const std::string& text) {
  if (!text.empty() && text.front() == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception&) {
      throw ValidationError("--pressure is not valid JSON: " + text);
    }
    return pressure_from_json(j);
  }
  const auto colon = text.find(':');
  json j{{"family", text.substr(0, colon)}};
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ValidationError("--pressure parameter without '=': " + item);
      const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
      if (key == "terms") {
        json terms = json::array();
        std::stringstream ts(value);
        std::string term;
        while (std::getline(ts, term, ';')) {
          double coef = 0.0, expo = 0.0;
          char tail = 0;
          if (std::sscanf(term.c_str(), "%lf^%lf%c", &coef, &expo, &tail) != 2) {
            throw ValidationError("--pressure term must read coef^exponent, got '" + term + "'");
          }
          terms.push_back({coef, expo});
        }
        j["terms"] = terms;
      } else {
        try {
          std::size_t used = 0;
          j[key] = std::stod(value, &used);
          if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
          throw ValidationError("--pressure parameter " + key + " is not a number: '" + value + "'");
        }
      }
    }
  }
  return pressure_from_json(j);
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("--set expects key=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &j;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i])) (*node)[parts[i]] = json::object();
    node = &(*node)[parts[i]];
    if (!node->is_object()) throw ValidationError("--set path '" + path + "' crosses a non-object");
  }
  (*node)[parts.back()] = value;
}

json checkpoint_to_json(const RunConfig& cfg, const ContinuationState& s) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return json{{"config", config_to_json(cfg)},
              {"state",
               {{"prev_c", s.prev_c},
                {"prev_f", vec(s.prev_f)},
                {"last_c", s.last_c},
                {"last_f", vec(s.last_f)},
                {"ds", s.ds},
                {"steps", s.steps},
                {"s_arc", s.s_arc}}}};
}

std::pair<RunConfig, ContinuationState> checkpoint_from_json(const json& j) {
  reject_unknown(j, {"config", "state"}, "checkpoint");
  if (!j.contains("config") || !j.contains("state")) throw ValidationError("checkpoint needs config and state");
  RunConfig cfg = config_from_json(j.at("config"));
  const auto& st = j.at("state");
  reject_unknown(st, {"prev_c", "prev_f", "last_c", "last_f", "ds", "steps", "s_arc"}, "checkpoint.state");
  ContinuationState s;
  std::vector<double> prev, last;
  read(st, "prev_c", s.prev_c, "checkpoint.state");
  read(st, "last_c", s.last_c, "checkpoint.state");
  read(st, "prev_f", prev, "checkpoint.state");
  read(st, "last_f", last, "checkpoint.state");
  read(st, "ds", s.ds, "checkpoint.state");
  read(st, "steps", s.steps, "checkpoint.state");
  read(st, "s_arc", s.s_arc, "checkpoint.state");
  s.prev_f = Eigen::Map<Eigen::VectorXd>(prev.data(), static_cast<Eigen::Index>(prev.size()));
  s.last_f = Eigen::Map<Eigen::VectorXd>(last.data(), static_cast<Eigen::Index>(last.size()));
  return {cfg, s};
}

}  // namespace epw::cli
