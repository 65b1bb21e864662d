#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "prodval/distribution.hpp"
#include "prodval/lattice.hpp"
#include "prodval/market.hpp"
#include "prodval/risk.hpp"

namespace prodval {

struct FullFulfillment {};
struct RiskMeasureFulfillment {
  RiskMeasureSpec measure;
};
struct ProbabilityThreshold {
  double p;
};
using FulfillmentSpec = std::variant<FullFulfillment, RiskMeasureFulfillment, ProbabilityThreshold>;

struct CostOfCapital {
  double eta;
};
// Capital bounded by the state-price value of the capital payoff. Holds
// the weight of the edge into every node (NaN where unavailable).
struct StatePriceBound {
  std::vector<double> edge_weights;
};
struct ZeroCapital {};
using FinanciabilitySpec = std::variant<CostOfCapital, StatePriceBound, ZeroCapital>;

struct Conditions {
  FulfillmentSpec fulfillment;
  FinanciabilitySpec financiability;
};

// Capital per node; only annual non-terminal nodes are meaningful.
struct CapitalSchedule {
  std::vector<double> capital;
};

void validate(const FulfillmentSpec& spec);
void validate(const FinanciabilitySpec& spec);

bool fulfillment_satisfied(const FulfillmentSpec& spec, const DiscreteDistribution& surplus);
// Translation-invariant measure rho with: fulfilled iff rho(surplus) <= 0.
RiskMeasureSpec fulfillment_measure(const FulfillmentSpec& spec);

// Year-end outcomes of the one-year period starting at an annual node.
struct YearOutcomes {
  NodeId start = kNoNode;
  std::vector<NodeId> nodes;
  std::vector<double> probability;
  std::vector<double> state_price;  // empty unless edge weights were supplied
};

YearOutcomes year_outcomes(const ScenarioTree& tree, NodeId annual_node,
                           const std::vector<double>* edge_weights = nullptr);
YearOutcomes year_outcomes(const ScenarioTree& tree, NodeId annual_node, const FinanciabilitySpec& spec);

double max_capital(const FinanciabilitySpec& spec, std::span<const double> payoff, std::span<const double> probability,
                   std::span<const double> state_price, double rate);
double max_capital(const FinanciabilitySpec& spec, const DiscreteDistribution& payoff, double rate);
bool financiability_holds(const FinanciabilitySpec& spec, double capital, std::span<const double> payoff,
                          std::span<const double> probability, std::span<const double> state_price, double rate);

struct HomogeneitySample {
  std::vector<double> payoff;
  std::vector<double> probability;
  std::vector<double> state_price;
  double rate = 0.0;
};

struct HomogeneityReport {
  double max_deviation = 0.0;
  std::size_t checks = 0;
  bool passed = true;
};

HomogeneityReport audit_positive_homogeneity(const FinanciabilitySpec& spec, std::span<const HomogeneitySample> samples,
                                             std::span<const double> factors, double tol = 1e-9);

struct TradablesAuditNode {
  NodeId node = kNoNode;
  double hurdle = 0.0;      // 1 + r + eta
  double max_return = 0.0;  // best expected gross return of a unit-price admissible portfolio
  double min_return = 0.0;  // worst one
  bool flagged = false;
};

struct TradablesAudit {
  std::vector<TradablesAuditNode> nodes;  // annual non-terminal nodes
  bool passed = true;
  std::string note;
};

TradablesAudit audit_consistency_with_tradables(const FinanciabilitySpec& spec, const TradableSet& market,
                                                const ScenarioTree& tree, const RestrictionSet& restriction,
                                                const RateCurve& rates);
TradablesAudit audit_neutrality_to_tradables(const FinanciabilitySpec& spec, const TradableSet& market,
                                             const ScenarioTree& tree, const RestrictionSet& restriction,
                                             const RateCurve& rates);

}  // namespace prodval
