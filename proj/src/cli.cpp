#include "ghostgame/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>

#include <CLI11.hpp>

#include "ghostgame/closed_form.hpp"
#include "ghostgame/config.hpp"
#include "ghostgame/report.hpp"
#include "ghostgame/simulate.hpp"
#include "ghostgame/solver.hpp"

namespace ghostgame {

using nlohmann::json;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "JSON run configuration")->required();
  cmd->add_option("--set", opts.overrides, "Override a field, e.g. --set sim.seed=7")
      ->allow_extra_args(false);
  cmd->add_option("-o,--output", opts.output, "Write the result here instead of stdout");
}

RunConfig load(const CommonOptions& opts) {
  RunConfig cfg = load_config(opts.config_path);
  if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
    apply_override(cfg, std::string("sim.seed=") + env);
  }
  for (const auto& o : opts.overrides) apply_override(cfg, o);
  return cfg;
}

// Writes to --output if given, otherwise to `out`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ConfigError("cannot open output file '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

void emit_json(const json& doc, const std::string& path, std::ostream& out) {
  Sink sink(path, out);
  sink.get() << doc.dump(2) << '\n';
}

void warn_validation(const ValidationReport& v, std::ostream& err) {
  if (v.all_ok()) return;
  err << "warning: parameter conditions fail; searching anyway (best effort):";
  for (const auto& c : v.checks) {
    if (!c.ok) err << ' ' << c.name;
  }
  err << '\n';
}

EquilibriumCertificate solve_or_throw(const RunConfig& cfg, std::ostream& err) {
  auto cert = solve_equilibrium(cfg.params, cfg.solver);
  warn_validation(cert.validation, err);
  return cert;
}

int cmd_check(const RunConfig& cfg, const CommonOptions& opts, std::ostream& out) {
  const auto report = validate(cfg.params);
  emit_json(to_json(report), opts.output, out);
  return report.all_ok() ? kExitOk : kExitMath;
}

int cmd_solve(const RunConfig& cfg, const CommonOptions& opts, std::ostream& out,
              std::ostream& err) {
  const auto cert = solve_or_throw(cfg, err);
  emit_json(to_json(cert), opts.output, out);
  if (!cert.certified) {
    err << "error: no candidate passed conditions (I)-(IV)\n";
    return kExitMath;
  }
  return kExitOk;
}

int cmd_curve(const RunConfig& cfg, const CommonOptions& opts, int points,
              std::optional<double> b1, std::optional<double> b2, std::ostream& out,
              std::ostream& err) {
  ThresholdPair tp;
  if (b1 && b2) {
    tp = {*b1, *b2};
  } else if (b1 || b2) {
    throw ConfigError("--b1 and --b2 must be given together");
  } else {
    const auto cert = solve_or_throw(cfg, err);
    if (!cert.certified) err << "warning: curve uses an uncertified candidate\n";
    tp = cert.star;
  }
  const ValueCurves curves(cfg.params, tp);
  Sink sink(opts.output, out);
  write_curve_csv(sink.get(), curves, points);
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const CommonOptions& opts, bool weak, std::ostream& out,
                 std::ostream& err) {
  const auto cert = solve_or_throw(cfg, err);
  if (!cert.certified) err << "warning: simulating an uncertified candidate\n";
  const auto policy = ControlPolicy::equilibrium(cfg.params, cert.star.b2);
  const ValueCurves curves(cfg.params, cert.star);

  json doc;
  doc["config"] = to_json(cfg);
  doc["thresholds"] = {
      {"b1_star", cert.star.b1}, {"b2_star", cert.star.b2}, {"certified", cert.certified}};
  doc["closed_form"] = {{"p0", cfg.sim.p0}, {"u", curves.u(cfg.sim.p0)},
                        {"v", curves.v(cfg.sim.p0)}};
  doc["stopper"] = to_json(estimate_stopper_reward(cfg.params, {cert.star.b1, policy}, cfg.sim));
  SimConfig fixed = cfg.sim;
  fixed.theta_mode = ThetaMode::kFixedOne;
  doc["controller"] =
      to_json(estimate_controller_reward(cfg.params, cert.star.b1, policy, policy, fixed));
  if (weak) {
    const auto w = weak_estimate(cfg.params, policy, policy, cert.star.b1, cfg.sim);
    if (w.low_ess) err << "warning: weak estimate has effective sample size below 1%\n";
    doc["weak_stopper"] = to_json(w);
  }
  emit_json(doc, opts.output, out);
  return kExitOk;
}

int cmd_nash_gap(const RunConfig& cfg, const CommonOptions& opts, std::ostream& out,
                 std::ostream& err) {
  const auto cert = solve_or_throw(cfg, err);
  if (!cert.certified) {
    err << "error: the Nash gap needs a certified equilibrium\n";
    emit_json(to_json(cert), opts.output, out);
    return kExitMath;
  }
  const auto report = nash_gap(cfg.params, cert.star, default_deviation_families(), cfg.sim);
  json doc;
  doc["config"] = to_json(cfg);
  doc["thresholds"] = {{"b1_star", cert.star.b1}, {"b2_star", cert.star.b2}};
  doc["nash_gap"] = to_json(report);
  emit_json(doc, opts.output, out);
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const CommonOptions& opts, std::ostream& out) {
  if (!cfg.sweep) throw ConfigError("sweep needs a 'sweep' section in the configuration");
  const auto& sw = *cfg.sweep;
  std::vector<SweepRow> rows;
  for (int i = 0; i < sw.steps; ++i) {
    SweepRow row;
    row.value = sw.value(i);
    ModelParams p = cfg.params;
    set_param(p, sw.parameter, row.value);
    try {
      const auto cert = solve_equilibrium(p, cfg.solver);
      row.b1 = cert.star.b1;
      row.b2 = cert.star.b2;
      row.certified = cert.certified;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }
  Sink sink(opts.output, out);
  write_sweep_csv(sink.get(), rows);
  const bool all_failed =
      std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return !r.error.empty(); });
  return all_failed ? kExitMath : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Threshold equilibria of the stopper-controller game with a hidden type"};
  app.name("ghostgame");
  app.require_subcommand(1);

  CommonOptions check_opts, solve_opts, curve_opts, sim_opts, nash_opts, sweep_opts;
  auto* check = app.add_subcommand("check", "Validate the parameter conditions");
  add_common(check, check_opts);
  auto* solve = app.add_subcommand("solve", "Solve and certify the equilibrium thresholds");
  add_common(solve, solve_opts);
  auto* curve = app.add_subcommand("curve", "Tabulate u, v and derivatives as CSV");
  add_common(curve, curve_opts);
  int points = 201;
  std::optional<double> b1, b2;
  curve->add_option("-n,--points", points, "Uniform grid points on [0,1]")
      ->check(CLI::Range(2, 10000000));
  curve->add_option("--b1", b1, "Use this stop threshold instead of solving");
  curve->add_option("--b2", b2, "Use this switch threshold instead of solving");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo rewards at the equilibrium");
  add_common(simulate, sim_opts);
  bool weak = false;
  simulate->add_flag("--weak", weak, "Also run the likelihood-ratio estimator");
  auto* nash = app.add_subcommand("nash-gap", "Best deviation gains for both players");
  add_common(nash, nash_opts);
  auto* sweep = app.add_subcommand("sweep", "Re-solve over a parameter grid (CSV)");
  add_common(sweep, sweep_opts);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (check->parsed()) return cmd_check(load(check_opts), check_opts, out);
    if (solve->parsed()) return cmd_solve(load(solve_opts), solve_opts, out, err);
    if (curve->parsed()) return cmd_curve(load(curve_opts), curve_opts, points, b1, b2, out, err);
    if (simulate->parsed()) return cmd_simulate(load(sim_opts), sim_opts, weak, out, err);
    if (nash->parsed()) return cmd_nash_gap(load(nash_opts), nash_opts, out, err);
    if (sweep->parsed()) return cmd_sweep(load(sweep_opts), sweep_opts, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NoEquilibriumFound& e) {
    err << "error: " << e.what() << '\n';
    out << json{{"error", e.what()}, {"scan", to_json(e.table())}}.dump(2) << '\n';
    return kExitMath;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitMath;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitMath;
  }
  return kExitInput;
}

}  // namespace ghostgame
