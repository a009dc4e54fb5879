#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghostgame/closed_form.hpp"
#include "ghostgame/params.hpp"
#include "ghostgame/simulate.hpp"
#include "ghostgame/solver.hpp"

namespace ghostgame {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const ConditionCheck& check);
nlohmann::json to_json(const ConditionReport& report);
nlohmann::json to_json(const EquilibriumCertificate& cert);
nlohmann::json to_json(const McEstimate& est);
nlohmann::json to_json(const WeakEstimate& est);
nlohmann::json to_json(const PlayerGap& gap);
nlohmann::json to_json(const NashGapReport& report);
nlohmann::json to_json(const std::vector<ScanRow>& table);

/// p,u,v,u_p,v_p,lambda_star on n_points uniform in [0,1]; derivative cells
/// are empty at p == b1 and p == b2.
void write_curve_csv(std::ostream& out, const ValueCurves& curves, int n_points);

struct SweepRow {
  double value = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  bool certified = false;
  std::string error;  // empty when the solve ran
};

/// value,b1_star,b2_star,certified,error
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace ghostgame
