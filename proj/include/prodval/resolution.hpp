#pragma once

#include <vector>

#include "prodval/engine.hpp"

namespace prodval {

// The strategy receiving the illiquid inflows that exceed the written-down
// share, and its cash flows: inflow = (1 - lambda_{ceil(t-1)}) Z~^psi_t,
// outflow at annual dates = its value plus the current excess.
struct ThetaPsi {
  Strategy strategy;
  CashflowProcess flows;
};

// `lambda` is indexed by node; only annual nodes are read.
ThetaPsi theta_psi_strategy(const Model& model, const IlliquidPortfolio& psi, const std::vector<double>& lambda,
                            const ReinvestPolicy& policy = {});

struct AdjustmentResult {
  // Per node. Interior nodes carry xi = 1 and the lambda of their annual ancestor.
  std::vector<double> xi;
  std::vector<double> lambda;
  std::vector<BalanceSheetRow> original_balance;  // annual nodes at dates >= 1
  ThetaPsi theta;
  int iterations = 0;

  // Filled by extend_to_full_fulfillment.
  ProductionFlows flows;
  Strategy strategy;
  CapitalSchedule capital;
  std::vector<double> cost;  // v-bar of the adjusted strategy
  ValidationReport validation;
  double max_scaling_error = 0.0;
  bool monotone = true;
  bool passed = false;
};

// Forward pass computing the write-down factors xi and lambda together with
// theta^psi. `cost` must be finite at every annual node.
AdjustmentResult adjustment_factors(const Model& model, const ProductionFlows& flows, const Strategy& strategy,
                                    const std::vector<double>& cost, const ReinvestPolicy& policy = {});

// Scales the strategy, capital and liability by lambda, feeds X^theta in as
// inflows and validates the result under full fulfillment.
AdjustmentResult extend_to_full_fulfillment(const Model& model, const ProductionFlows& flows, const Strategy& strategy,
                                            const CapitalSchedule& capital, const std::vector<double>& cost,
                                            const Conditions& conditions, Mode mode,
                                            const ReinvestPolicy& policy = {});

}  // namespace prodval
