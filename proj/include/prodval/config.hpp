#pragma once

#include <string>

#include "prodval/engine.hpp"

namespace prodval {

// A fully validated valuation problem.
struct ValuationProblem {
  Model model;
  ProductionFlows flows;
  Conditions conditions;
  EngineConfig engine;
  ReinvestPolicy theta_policy;
  int stage = 1;
  // Rate source as written in the config: "bonds", "flat" or "annual".
  std::string rate_source = "bonds";
  double flat_rate = 0.0;
  std::vector<double> annual_rates;  // per node when rate_source == "annual"
  bool weights_from_certificate = false;
};

// Errors: ParseError (line/column), SchemaViolation (field path), CrossRefError (node).
ValuationProblem parse_config(const std::string& text);
ValuationProblem load_config(const std::string& path);
// Canonical JSON text; parse_config(save_config(p)) reproduces p.
std::string save_config(const ValuationProblem& problem);

}  // namespace prodval
