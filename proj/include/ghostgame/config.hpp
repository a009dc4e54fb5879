#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ghostgame/params.hpp"
#include "ghostgame/simulate.hpp"
#include "ghostgame/solver.hpp"

namespace ghostgame {

/// Re-solve at `steps` evenly spaced values of one parameter, ends included.
struct SweepSpec {
  std::string parameter;  // lambda_hi, lambda_lo, c or r
  double lo = 0.0;
  double hi = 0.0;
  int steps = 2;

  double value(int i) const;
};

struct RunConfig {
  ModelParams params;
  SolverOpts solver;
  SimConfig sim;
  std::optional<SweepSpec> sweep;
};

/// Malformed or unknown configuration content.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sections: "params" (required, all four fields), "solver", "sim", "sweep"
/// (optional). Unknown keys anywhere raise ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Applies "section.key=value", e.g. "sim.seed=7" or "params.r=0.25".
void apply_override(RunConfig& cfg, const std::string& assignment);

nlohmann::json to_json(const RunConfig& cfg);

void set_param(ModelParams& params, const std::string& name, double value);
double get_param(const ModelParams& params, const std::string& name);

}  // namespace ghostgame
