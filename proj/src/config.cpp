#include "ghostgame/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace ghostgame {

using nlohmann::json;

double SweepSpec::value(int i) const {
  if (steps <= 1) return lo;
  if (i == steps - 1) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
}

void set_param(ModelParams& params, const std::string& name, double value) {
  if (name == "lambda_hi") {
    params.lambda_hi = value;
  } else if (name == "lambda_lo") {
    params.lambda_lo = value;
  } else if (name == "c") {
    params.c = value;
  } else if (name == "r") {
    params.r = value;
  } else {
    throw ConfigError("unknown model parameter '" + name + "'");
  }
}

double get_param(const ModelParams& params, const std::string& name) {
  if (name == "lambda_hi") return params.lambda_hi;
  if (name == "lambda_lo") return params.lambda_lo;
  if (name == "c") return params.c;
  if (name == "r") return params.r;
  throw ConfigError("unknown model parameter '" + name + "'");
}

namespace {

const json& section(const json& doc, const char* name) {
  const json& s = doc.at(name);
  if (!s.is_object()) throw ConfigError(std::string("'") + name + "' must be an object");
  return s;
}

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      std::string known;
      for (const auto& a : allowed) known += (known.empty() ? "" : ", ") + a;
      throw ConfigError("unknown key '" + where + item.key() + "' (expected one of: " + known +
                        ")");
    }
  }
}

double number(const json& obj, const std::string& where, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + where + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("'" + where + key + "' must be finite");
  return x;
}

double required_number(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError("missing required key '" + where + key + "'");
  return number(obj, where, key);
}

std::int64_t integer(const json& obj, const std::string& where, const char* key) {
  const json& v = obj.at(key);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && std::floor(x) == x && std::abs(x) < 9.0e15) {
      return static_cast<std::int64_t>(x);
    }
  }
  throw ConfigError("'" + where + key + "' must be an integer");
}

template <typename T>
void maybe(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  if constexpr (std::is_same_v<T, double>) {
    out = number(obj, where, key);
  } else {
    const std::int64_t v = integer(obj, where, key);
    if (v < std::numeric_limits<T>::min() || v > std::numeric_limits<T>::max()) {
      throw ConfigError("'" + where + key + "' is out of range");
    }
    out = static_cast<T>(v);
  }
}

std::uint64_t parse_seed(const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError("'sim.seed' must be a non-negative integer");
}

ThetaMode parse_theta_mode(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "fixed_one") return ThetaMode::kFixedOne;
    if (s == "bernoulli") return ThetaMode::kBernoulli;
  }
  throw ConfigError("'sim.theta_mode' must be \"fixed_one\" or \"bernoulli\"");
}

void check_solver(const SolverOpts& s) {
  if (!(s.tol_b > 0.0)) throw ConfigError("'solver.tol_b' must be positive");
  if (!(s.tol_f > 0.0)) throw ConfigError("'solver.tol_f' must be positive");
  if (!(s.tol_g > 0.0)) throw ConfigError("'solver.tol_g' must be positive");
  if (s.scan_n < 2) throw ConfigError("'solver.scan_n' must be at least 2");
  if (s.grid_n < 2) throw ConfigError("'solver.grid_n' must be at least 2");
  if (s.outer_n < 2) throw ConfigError("'solver.outer_n' must be at least 2");
  if (!(s.bracket_eps > 0.0 && s.bracket_eps < 0.1)) {
    throw ConfigError("'solver.bracket_eps' must lie in (0, 0.1)");
  }
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  reject_unknown(doc, "", {"params", "solver", "sim", "sweep"});
  if (!doc.contains("params")) throw ConfigError("missing required section 'params'");

  RunConfig cfg;
  {
    const json& p = section(doc, "params");
    reject_unknown(p, "params.", {"lambda_hi", "lambda_lo", "c", "r"});
    cfg.params.lambda_hi = required_number(p, "params.", "lambda_hi");
    cfg.params.lambda_lo = required_number(p, "params.", "lambda_lo");
    cfg.params.c = required_number(p, "params.", "c");
    cfg.params.r = required_number(p, "params.", "r");
  }
  if (doc.contains("solver")) {
    const json& s = section(doc, "solver");
    const std::string w = "solver.";
    reject_unknown(s, w,
                   {"tol_b", "tol_f", "tol_g", "scan_n", "grid_n", "bracket_eps", "outer_n"});
    maybe(s, w, "tol_b", cfg.solver.tol_b);
    maybe(s, w, "tol_f", cfg.solver.tol_f);
    maybe(s, w, "tol_g", cfg.solver.tol_g);
    maybe(s, w, "scan_n", cfg.solver.scan_n);
    maybe(s, w, "grid_n", cfg.solver.grid_n);
    maybe(s, w, "bracket_eps", cfg.solver.bracket_eps);
    maybe(s, w, "outer_n", cfg.solver.outer_n);
  }
  check_solver(cfg.solver);
  if (doc.contains("sim")) {
    const json& s = section(doc, "sim");
    const std::string w = "sim.";
    reject_unknown(s, w,
                   {"dt", "horizon", "n_paths", "seed", "p0", "theta_mode", "threads",
                    "absorb_tol"});
    maybe(s, w, "dt", cfg.sim.dt);
    maybe(s, w, "horizon", cfg.sim.horizon);
    maybe(s, w, "n_paths", cfg.sim.n_paths);
    if (s.contains("seed")) cfg.sim.seed = parse_seed(s.at("seed"));
    maybe(s, w, "p0", cfg.sim.p0);
    if (s.contains("theta_mode")) cfg.sim.theta_mode = parse_theta_mode(s.at("theta_mode"));
    maybe(s, w, "threads", cfg.sim.threads);
    maybe(s, w, "absorb_tol", cfg.sim.absorb_tol);
    try {
      check_config(cfg.sim);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (doc.contains("sweep") && !doc.at("sweep").is_null()) {
    const json& s = section(doc, "sweep");
    const std::string w = "sweep.";
    reject_unknown(s, w, {"parameter", "lo", "hi", "steps"});
    SweepSpec sw;
    if (!s.contains("parameter") || !s.at("parameter").is_string()) {
      throw ConfigError("'sweep.parameter' must be a string");
    }
    sw.parameter = s.at("parameter").get<std::string>();
    get_param(cfg.params, sw.parameter);
    sw.lo = required_number(s, w, "lo");
    sw.hi = required_number(s, w, "hi");
    if (!s.contains("steps")) throw ConfigError("missing required key 'sweep.steps'");
    const std::int64_t steps = integer(s, w, "steps");
    if (steps < 1 || steps > 1000000) throw ConfigError("'sweep.steps' must lie in [1, 1e6]");
    sw.steps = static_cast<int>(steps);
    cfg.sweep = sw;
  }
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("JSON parse error: ") + e.what());
  }
  return parse_config(doc);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

json to_json(const RunConfig& cfg) {
  json doc;
  doc["params"] = {{"lambda_hi", cfg.params.lambda_hi},
                   {"lambda_lo", cfg.params.lambda_lo},
                   {"c", cfg.params.c},
                   {"r", cfg.params.r}};
  doc["solver"] = {{"tol_b", cfg.solver.tol_b},       {"tol_f", cfg.solver.tol_f},
                   {"tol_g", cfg.solver.tol_g},       {"scan_n", cfg.solver.scan_n},
                   {"grid_n", cfg.solver.grid_n},     {"bracket_eps", cfg.solver.bracket_eps},
                   {"outer_n", cfg.solver.outer_n}};
  doc["sim"] = {{"dt", cfg.sim.dt},
                {"horizon", cfg.sim.horizon},
                {"n_paths", cfg.sim.n_paths},
                {"seed", cfg.sim.seed},
                {"p0", cfg.sim.p0},
                {"theta_mode",
                 cfg.sim.theta_mode == ThetaMode::kFixedOne ? "fixed_one" : "bernoulli"},
                {"threads", cfg.sim.threads},
                {"absorb_tol", cfg.sim.absorb_tol}};
  if (cfg.sweep) {
    doc["sweep"] = {{"parameter", cfg.sweep->parameter},
                    {"lo", cfg.sweep->lo},
                    {"hi", cfg.sweep->hi},
                    {"steps", cfg.sweep->steps}};
  }
  return doc;
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
  }
  const std::string sec = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;  // bare words such as bernoulli
  }
  json doc = to_json(cfg);
  if (!doc.contains(sec)) doc[sec] = json::object();
  doc[sec][key] = value;
  cfg = parse_config(doc);
}

}  // namespace ghostgame
