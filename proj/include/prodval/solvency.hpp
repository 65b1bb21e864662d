#pragma once

#include <vector>

#include "prodval/distribution.hpp"
#include "prodval/engine.hpp"
#include "prodval/risk.hpp"

namespace prodval {

struct Stage1Result {
  double assets = 0.0;  // A_0
  double scr = 0.0;     // SCR_0
  double value = 0.0;   // v-bar = A_0 - SCR_0
  double prob_m1 = 1.0;
};

// One period with risk-free investment; L is the liability value at the period end.
Stage1Result stage1_value(const DiscreteDistribution& liability, double rate, double eta, const RiskMeasureSpec& rho);
// E[L]/(1+r) + eta/(1+r+eta) * rho((E[L]-L)/(1+r)); needs P[M_1] = 1.
double stage1_closed_form(const DiscreteDistribution& liability, double rate, double eta, const RiskMeasureSpec& rho);

// Period-end outcomes seen from one annual node.
struct PeriodOutcomes {
  std::vector<double> probability;
  std::vector<double> outflow;  // X_1
  std::vector<double> bel;      // BEL_1
  std::vector<double> rm;       // RM_1
};

struct StageDecomposition {
  double bel = 0.0;
  double rm = 0.0;
  double scr = 0.0;
  double prob_m1 = 1.0;
  double total() const { return bel + rm; }
};

// `bel_gross_return`, when given, is the period-end value per unit invested
// in the best-estimate strategy; otherwise that strategy is risk-free.
StageDecomposition stage2_decompose(const PeriodOutcomes& outcomes, double rate, double eta, const RiskMeasureSpec& rho,
                                    const std::vector<double>* bel_gross_return = nullptr);
StageDecomposition stage3_decompose(const PeriodOutcomes& outcomes, double rate, double eta, const RiskMeasureSpec& rho);

struct SolvencyNode {
  NodeId node = kNoNode;
  double bel = 0.0;
  double rm = 0.0;
  double scr = 0.0;
  double prob_m1 = 1.0;
  // Period-end values of the risk-free BEL, RM and SCR holdings.
  double a_bel = 0.0;
  double a_rm = 0.0;
  double a_scr = 0.0;
  double total = 0.0;
};

struct SolvencyReport {
  int stage = 1;
  std::vector<SolvencyNode> nodes;  // annual nodes in id order; horizon nodes carry BEL = Y
  bool rm_cross_checked = false;
  double rm_formula = 0.0;  // CoC * sum SCR_i / (1+r)^(i+1)
  double rm_error = 0.0;

  const SolvencyNode* find(NodeId n) const;
};

// Backward recursion over annual nodes with net outflows X^L - Z~^L.
SolvencyReport multi_period_solvency(const Model& model, const LiabilitySpec& liability, double eta,
                                     const RiskMeasureSpec& rho, int stage);

}  // namespace prodval
