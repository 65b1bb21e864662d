#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "prodval/conditions.hpp"
#include "prodval/market.hpp"
#include "prodval/strategy.hpp"

namespace prodval {

struct LiabilitySpec {
  std::vector<double> outflow;   // X^L
  std::vector<double> inflow;    // Z~^L
  std::vector<double> terminal;  // Y at horizon nodes

  static LiabilitySpec zeros(std::size_t node_count);
};

struct IlliquidPortfolio {
  std::vector<double> inflow;  // aggregate Z~^psi
};

// Cash flows a production strategy must handle besides its own tradables.
struct ProductionFlows {
  LiabilitySpec liability;
  IlliquidPortfolio illiquid;
  std::vector<double> extra_inflow;  // e.g. X^theta at annual dates; empty means none

  static ProductionFlows for_liability(LiabilitySpec liability);
  double inflow_at(NodeId n) const;  // Z~^L + Z~^psi + extra
  double outflow_at(NodeId n) const { return liability.outflow.at(n); }
  void validate(const ScenarioTree& tree) const;
};

enum class Mode { A, B };
enum class FailureKind { None, Default, CannotContinue };

const char* to_string(Mode mode);
const char* to_string(FailureKind kind);

struct RiskFreeOnly {};
struct FixedMix {
  std::vector<std::size_t> tradables;  // empty: every coordinate of the restriction
  int grid_resolution = 4;
  int refine_depth = 3;
};
struct ExplicitFamily {
  Strategy strategy;
};
using StrategyFamily = std::variant<RiskFreeOnly, FixedMix, ExplicitFamily>;

std::string family_name(const StrategyFamily& family);

struct EngineConfig {
  Mode mode = Mode::B;
  std::vector<StrategyFamily> families{RiskFreeOnly{}};
  double bisection_tol = 1e-10;
};

struct BalanceSheetRow {
  NodeId node = kNoNode;
  double assets = 0.0;       // A'_i
  double liabilities = 0.0;  // L_i
  double capital_payoff = 0.0;  // C'_i
  bool failed = false;
  FailureKind kind = FailureKind::None;
};

BalanceSheetRow balance_sheet(const Model& model, const ProductionFlows& flows, const Strategy& strategy,
                              const std::vector<double>& cost, NodeId n);
FailureKind detect_failure(const BalanceSheetRow& row, double tradable_resources, double outflow);

struct OnePeriodResult {
  bool feasible = false;
  double cost = 0.0;     // v-bar_i
  double capital = 0.0;  // C_i
  double value = 0.0;    // v_i(phi)
  double top_up = 0.0;   // amount placed in the family's allocation rule
  bool clamped = false;
  std::size_t family = 0;
  std::vector<double> parameters;
  std::vector<std::pair<NodeId, Portfolio>> portfolios;  // out-portfolios at the year's rebalancing nodes
  std::vector<NodeId> year_end;
  std::vector<double> surplus;  // A' - L at year_end
};

// Best member of one family for the year starting at annual node n.
// `cost` holds v-bar at the year-end nodes.
OnePeriodResult build_one_period(const Model& model, const ProductionFlows& flows, NodeId n,
                                 const std::vector<double>& cost, const StrategyFamily& family,
                                 const Conditions& conditions, Mode mode, double bisection_tol = 1e-10);

struct NodeValuation {
  double cost = 0.0;
  double capital = 0.0;
  double value = 0.0;
  double top_up = 0.0;
  bool feasible = true;
  bool clamped = false;
  std::size_t family = 0;
  std::vector<double> parameters;
};

struct ProductionCostProcess {
  std::vector<NodeValuation> nodes;  // annual nodes; horizon nodes carry Y
  Strategy strategy;
  CapitalSchedule capital;
  std::vector<BalanceSheetRow> balance;  // annual nodes at dates >= 1

  std::vector<double> cost() const;
  bool feasible() const;
};

ProductionCostProcess backward_value(const Model& model, const ProductionFlows& flows, const EngineConfig& config,
                                     const Conditions& conditions);

struct ValidationSpan {
  int first_year = 0;
  int last_year = -1;  // -1: horizon
};

struct ValidationNode {
  NodeId node = kNoNode;
  bool checked = false;
  bool conversion_ok = true;
  bool sign_ok = true;
  bool financiability_ok = true;
  bool fulfillment_ok = true;
  bool mode_ok = true;
  double max_conversion_residual = 0.0;
  double min_interior_value = 0.0;
  double capital = 0.0;
  double max_capital = 0.0;
  double worst_surplus = 0.0;
  double cost = 0.0;

  bool passed() const { return conversion_ok && sign_ok && financiability_ok && fulfillment_ok && mode_ok; }
};

struct ValidationReport {
  std::vector<ValidationNode> nodes;
  bool passed = true;
  std::string first_failure;
};

// Checks the production-strategy conditions year by year on the start set
// (default: every node of the first year) and on the no-failure events.
ValidationReport validate_production_strategy(const Model& model, const ProductionFlows& flows, const Strategy& strategy,
                                              const CapitalSchedule& capital, const Conditions& conditions, Mode mode,
                                              ValidationSpan span = {}, const std::vector<NodeId>* start_set = nullptr);

// v-bar_i = v_i(phi) - C_i at annual nodes, Y at the horizon.
std::vector<double> strategy_costs(const Model& model, const ProductionFlows& flows, const Strategy& strategy,
                                   const CapitalSchedule& capital);

// Where interim balances are parked: the risk-free bond of the current
// year, or a fixed tradable.
struct ReinvestPolicy {
  enum class Kind { RiskFree, Tradable } kind = Kind::RiskFree;
  std::size_t tradable = 0;
};

// Units of tradables worth `value` at node n under the policy.
Portfolio reinvest(const Model& model, NodeId n, double value, const ReinvestPolicy& policy);

struct ShiftReport {
  std::vector<NodeId> nodes;     // annual nodes checked
  std::vector<double> expected;  // predicted shift per node
  std::vector<double> observed;  // realized shift per node
  double max_error = 0.0;
  ValidationReport validation;
  bool passed = false;
};

// Adds the short position L(phi) to the liability and phi' to the base
// strategy; checks v-bar(L + L(phi)) = v-bar(L) + v_i(phi').
ShiftReport add_short_position(const Model& model, const ProductionFlows& flows, const ShortPositionLiability& shortpos,
                               const Strategy& base, const CapitalSchedule& capital, const Conditions& conditions,
                               Mode mode);

// Replaces the static tradable portfolio psi by its inflows as an illiquid
// asset, adds the reinvestment strategy xi and raises capital by v_i(psi);
// checks v-bar shifts by -v_i(psi).
ShiftReport illiquid_replica_shift(const Model& model, const ProductionFlows& flows, const Portfolio& psi,
                                   const Strategy& base, const CapitalSchedule& capital, const Conditions& conditions,
                                   Mode mode, const ReinvestPolicy& policy = {});

}  // namespace prodval
