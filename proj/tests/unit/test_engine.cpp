#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "../support/generators.hpp"
#include "fixtures.hpp"
#include "prodval/engine.hpp"
#include "prodval/error.hpp"

using namespace prodval;
using namespace prodval::testing;

namespace {

std::vector<double> zero_cost(const Model& m) { return std::vector<double>(m.tree.size(), 0.0); }

ValuationProblem negative_cost() { return load_config(data_path("negative_cost.json")); }

NodeId node(const ValuationProblem& p, const std::string& label) { return *p.model.tree.find(label); }

Conditions state_price_conditions(const Model& m) {
  const ConsistencyCertificate c = check_consistency(m.market, m.tree, m.restriction);
  return {FullFulfillment{}, StatePriceBound{c.edge_weights(m.tree)}};
}

}  // namespace

TEST(OnePeriod, TwoPointRiskFree) {
  const ValuationProblem p = two_point();
  const OnePeriodResult r = build_one_period(p.model, p.flows, p.model.tree.root(), zero_cost(p.model), RiskFreeOnly{},
                                             p.conditions, Mode::B);
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.value, 117.64705882352942, 1e-9);
  EXPECT_NEAR(r.capital, 18.518518518518519, 1e-9);
  EXPECT_NEAR(r.cost, 99.128540305010894, 1e-9);
  ASSERT_EQ(r.year_end.size(), 2u);
  // Surplus A' - L is 40 on the good branch and 0 on the bad one.
  EXPECT_NEAR(std::max(r.surplus[0], r.surplus[1]), 40.0, 1e-9);
  EXPECT_NEAR(std::min(r.surplus[0], r.surplus[1]), 0.0, 1e-9);
}

TEST(OnePeriod, DeterministicLiability) {
  ValuationProblem p = two_point();
  p.flows.liability.outflow[node(p, "a1")] = 100.0;
  p.flows.liability.outflow[node(p, "b1")] = 100.0;
  for (const Conditions& c : {Conditions{FullFulfillment{}, CostOfCapital{0.06}},
                              Conditions{FullFulfillment{}, ZeroCapital{}}}) {
    const OnePeriodResult r = build_one_period(p.model, p.flows, 0, zero_cost(p.model), RiskFreeOnly{}, c, Mode::B);
    EXPECT_NEAR(r.cost, 100.0 / 1.02, 1e-9);
    EXPECT_NEAR(r.capital, 0.0, 1e-9);
  }
}

TEST(OnePeriod, ZeroLiability) {
  ValuationProblem p = two_point();
  p.flows.liability = LiabilitySpec::zeros(p.model.tree.size());
  const OnePeriodResult r = build_one_period(p.model, p.flows, 0, zero_cost(p.model), RiskFreeOnly{}, p.conditions, Mode::B);
  EXPECT_DOUBLE_EQ(r.cost, 0.0);
  EXPECT_DOUBLE_EQ(r.capital, 0.0);
}

TEST(OnePeriod, FixedMixNeverWorseThanRiskFree) {
  const ValuationProblem p = two_point();
  const OnePeriodResult rf = build_one_period(p.model, p.flows, 0, zero_cost(p.model), RiskFreeOnly{}, p.conditions, Mode::B);
  const OnePeriodResult fm = build_one_period(p.model, p.flows, 0, zero_cost(p.model), FixedMix{}, p.conditions, Mode::B);
  ASSERT_TRUE(fm.feasible);
  EXPECT_LE(fm.cost, rf.cost + 1e-9);
}

TEST(OnePeriod, EquityOnlyIsInfeasibleUnderFullFulfillment) {
  const ValuationProblem p = load_config(data_path("infeasible.json"));
  const ProductionCostProcess pcp = backward_value(p.model, p.flows, p.engine, p.conditions);
  EXPECT_FALSE(pcp.feasible());
  EXPECT_FALSE(std::isfinite(pcp.nodes[0].cost));
}

TEST(BackwardValue, NegativeCostModeB) {
  ValuationProblem p = negative_cost();
  p.engine.mode = Mode::B;
  const ProductionCostProcess pcp = backward_value(p.model, p.flows, p.engine, p.conditions);
  EXPECT_DOUBLE_EQ(pcp.nodes[0].cost, 10.0);
  EXPECT_TRUE(pcp.feasible());
}

TEST(BackwardValue, NegativeCostModeA) {
  ValuationProblem p = negative_cost();
  p.engine.mode = Mode::A;
  const ProductionCostProcess pcp = backward_value(p.model, p.flows, p.engine, p.conditions);
  EXPECT_NEAR(pcp.nodes[node(p, "n1")].cost, -100.0 / 1.06, 1e-9);
  EXPECT_NEAR(pcp.nodes[0].cost, 10.0 / 1.06 - 100.0 / (1.06 * 1.06), 1e-9);
}

TEST(BackwardValue, ZeroLiabilityCostsNothing) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    ScenarioTree tree = random_tree(rng, 2, 2, 3);
    RandomMarket rm = random_consistent_market(rng, tree, 1, false);
    const Model m = make_model(std::move(tree), std::move(rm.market));
    const ProductionFlows flows = ProductionFlows::for_liability(LiabilitySpec::zeros(m.tree.size()));
    EngineConfig cfg;
    cfg.families = {RiskFreeOnly{}, FixedMix{}};
    const Conditions cond{RiskMeasureFulfillment{ExpectedShortfall{0.1}}, CostOfCapital{0.06}};
    const ProductionCostProcess pcp = backward_value(m, flows, cfg, cond);
    for (int y = 0; y < m.tree.grid().horizon(); ++y) {
      for (NodeId n : m.tree.nodes_in_year(y)) EXPECT_NEAR(pcp.nodes[n].cost, 0.0, 1e-12);
    }
  }
}

TEST(BackwardValue, ValidatesAndMatchesStrategyCosts) {
  const ValuationProblem p = two_point();
  const ProductionCostProcess pcp = backward_value(p.model, p.flows, p.engine, p.conditions);
  const ValidationReport rep =
      validate_production_strategy(p.model, p.flows, pcp.strategy, pcp.capital, p.conditions, Mode::B);
  EXPECT_TRUE(rep.passed) << rep.first_failure;
  const std::vector<double> c = strategy_costs(p.model, p.flows, pcp.strategy, pcp.capital);
  EXPECT_NEAR(c[0], pcp.nodes[0].cost, 1e-9);
}

TEST(Validation, InflatedCapitalBreaksFinanciability) {
  const ValuationProblem p = two_point();
  const ProductionCostProcess pcp = backward_value(p.model, p.flows, p.engine, p.conditions);
  CapitalSchedule cap = pcp.capital;
  cap.capital[0] *= 1.01;
  const ValidationReport rep = validate_production_strategy(p.model, p.flows, pcp.strategy, cap, p.conditions, Mode::B);
  EXPECT_FALSE(rep.passed);
  EXPECT_FALSE(rep.nodes[0].financiability_ok);
  EXPECT_TRUE(rep.nodes[0].fulfillment_ok);
}

TEST(Validation, ShrunkStrategyBreaksFullFulfillment) {
  ValuationProblem p = two_point();
  p.conditions.fulfillment = FullFulfillment{};
  const ProductionCostProcess pcp = backward_value(p.model, p.flows, p.engine, p.conditions);
  const ValidationReport ok = validate_production_strategy(p.model, p.flows, pcp.strategy, pcp.capital, p.conditions, Mode::B);
  EXPECT_TRUE(ok.passed) << ok.first_failure;
  const ValidationReport rep =
      validate_production_strategy(p.model, p.flows, pcp.strategy.scaled(0.99), pcp.capital, p.conditions, Mode::B);
  EXPECT_FALSE(rep.passed);
  EXPECT_FALSE(rep.nodes[0].fulfillment_ok);
  EXPECT_LT(rep.nodes[0].worst_surplus, 0.0);
}

TEST(BalanceSheet, Rows) {
  const ValuationProblem p = negative_cost();
  const Strategy zero(p.model.tree, p.model.market.count());
  std::vector<double> cost(p.model.tree.size(), 0.0);
  const NodeId n1 = node(p, "n1");
  BalanceSheetRow row = balance_sheet(p.model, p.flows, zero, cost, n1);
  EXPECT_DOUBLE_EQ(row.assets, 0.0);
  EXPECT_DOUBLE_EQ(row.liabilities, 10.0);
  EXPECT_DOUBLE_EQ(row.capital_payoff, 0.0);
  EXPECT_TRUE(row.failed);
  EXPECT_EQ(row.kind, FailureKind::Default);
  cost[n1] = -94.34;
  row = balance_sheet(p.model, p.flows, zero, cost, n1);
  EXPECT_DOUBLE_EQ(row.assets, 94.34);
  EXPECT_DOUBLE_EQ(row.liabilities, 10.0);
  EXPECT_DOUBLE_EQ(row.capital_payoff, 84.34);
  cost[n1] = 90.0;
  row = balance_sheet(p.model, p.flows, zero, cost, n1);
  EXPECT_DOUBLE_EQ(row.liabilities, 100.0);
  EXPECT_THROW(balance_sheet(p.model, p.flows, zero, cost, 0), Error);
}

TEST(DetectFailure, Kinds) {
  BalanceSheetRow row;
  row.assets = 100.0;
  row.liabilities = 90.0;
  EXPECT_EQ(detect_failure(row, 50.0, 10.0), FailureKind::None);
  row.assets = 50.0;
  EXPECT_EQ(detect_failure(row, 5.0, 10.0), FailureKind::Default);
  EXPECT_EQ(detect_failure(row, 20.0, 10.0), FailureKind::CannotContinue);
}

TEST(Reinvest, RiskFreeBond) {
  const ValuationProblem p = two_point();
  const Portfolio w = reinvest(p.model, 0, 1.0, {});
  EXPECT_NEAR(w[0], 1.02, 1e-12);
  EXPECT_DOUBLE_EQ(w[1], 0.0);
  const ValuationProblem q = load_config(data_path("infeasible.json"));
  EXPECT_THROW(reinvest(q.model, 0, 1.0, {}), Error);
}

TEST(ShortPosition, ZeroUnderlyingIsIdentity) {
  const ValuationProblem p = negative_cost();
  const ProductionCostProcess pcp = backward_value(p.model, p.flows, p.engine, p.conditions);
  const ShortPositionLiability zero{Strategy(p.model.tree, p.model.market.count()),
                                    CashflowProcess::zeros(p.model.tree.size()), StopSet(p.model.tree, {}), false};
  const ShiftReport rep = add_short_position(p.model, p.flows, zero, pcp.strategy, pcp.capital, p.conditions, Mode::A);
  EXPECT_TRUE(rep.passed);
  for (double e : rep.expected) EXPECT_DOUBLE_EQ(e, 0.0);
  EXPECT_LE(rep.max_error, 1e-12);
}

TEST(ShortPosition, BondHeldToHorizonShiftsByItsPrice) {
  const ValuationProblem p = negative_cost();
  const ProductionCostProcess pcp = backward_value(p.model, p.flows, p.engine, p.conditions);
  Strategy bond(p.model.tree, p.model.market.count());
  for (const char* l : {"r", "h1"}) bond.set_out(node(p, l), {1.0, 0.0, 0.0});
  for (const char* l : {"n1", "h2"}) bond.set_out(node(p, l), {0.0, 1.0, 0.0});
  CashflowProcess uflows = CashflowProcess::zeros(p.model.tree.size());
  const ShortPositionLiability sp{bond, uflows, StopSet(p.model.tree, {}), false};
  const ShiftReport rep = add_short_position(p.model, p.flows, sp, pcp.strategy, pcp.capital, p.conditions, Mode::A);
  EXPECT_TRUE(rep.passed) << rep.validation.first_failure;
  ASSERT_FALSE(rep.expected.empty());
  EXPECT_DOUBLE_EQ(rep.expected[0], 1.0);
  EXPECT_LE(rep.max_error, 1e-9);
}

TEST(IlliquidShift, ZeroPortfolio) {
  ValuationProblem p = negative_cost();
  p.conditions = state_price_conditions(p.model);
  const ProductionCostProcess pcp = backward_value(p.model, p.flows, p.engine, p.conditions);
  const ShiftReport rep = illiquid_replica_shift(p.model, p.flows, Portfolio(3, 0.0), pcp.strategy, pcp.capital,
                                                 p.conditions, Mode::A);
  EXPECT_TRUE(rep.passed) << rep.validation.first_failure;
  for (double e : rep.expected) EXPECT_DOUBLE_EQ(e, 0.0);
}

TEST(IlliquidShift, OnePeriodBond) {
  ValuationProblem p = negative_cost();
  p.conditions = state_price_conditions(p.model);
  const ProductionCostProcess pcp = backward_value(p.model, p.flows, p.engine, p.conditions);
  const ShiftReport rep = illiquid_replica_shift(p.model, p.flows, Portfolio{1.0, 0.0, 0.0}, pcp.strategy, pcp.capital,
                                                 p.conditions, Mode::A);
  ASSERT_FALSE(rep.expected.empty());
  EXPECT_EQ(rep.nodes[0], p.model.tree.root());
  EXPECT_NEAR(rep.expected[0], 1.0, 1e-12);
  EXPECT_LE(rep.max_error, 1e-9);
  EXPECT_TRUE(rep.passed) << rep.validation.first_failure;
}

TEST(IlliquidShift, CostOfCapitalFailsNeutrality) {
  const ValuationProblem p = negative_cost();
  const ProductionCostProcess pcp = backward_value(p.model, p.flows, p.engine, p.conditions);
  try {
    illiquid_replica_shift(p.model, p.flows, Portfolio{1.0, 0.0, 0.0}, pcp.strategy, pcp.capital, p.conditions, Mode::A);
    ADD_FAILURE() << "neutrality audit did not fire";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NeutralityAuditFailed);
  }
}

TEST(EngineProperty, CostIsPositivelyHomogeneousInTheLiability) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    ScenarioTree tree = random_tree(rng, 2, 2, 3);
    RandomMarket rm = random_consistent_market(rng, tree, 1, false);
    const Model m = make_model(std::move(tree), std::move(rm.market));
    const LiabilitySpec l = random_liability(rng, m.tree, 10.0, 0.0, false);
    const double c = uniform(rng, 0.1, 5.0);
    LiabilitySpec scaled = l;
    for (double& x : scaled.outflow) x *= c;
    const Conditions cond{RiskMeasureFulfillment{ValueAtRisk{0.1}}, CostOfCapital{0.06}};
    EngineConfig cfg;
    cfg.families = {RiskFreeOnly{}, FixedMix{}};
    const double base = backward_value(m, ProductionFlows::for_liability(l), cfg, cond).nodes[0].cost;
    const double big = backward_value(m, ProductionFlows::for_liability(scaled), cfg, cond).nodes[0].cost;
    EXPECT_NEAR(big, c * base, 1e-8 * std::max(1.0, std::abs(c * base)));
  }
}

TEST(EngineProperty, ThreadCountDoesNotChangeResults) {
  const ScenarioTree tree = binary_year_tree(3, 5);
  Rng rng(5);
  RandomMarket rm = random_consistent_market(rng, tree, 1, false);
  const Model m = make_model(tree, std::move(rm.market));
  const ProductionFlows flows = ProductionFlows::for_liability(random_liability(rng, m.tree, 10.0, 1.0, true));
  const Conditions cond{RiskMeasureFulfillment{ExpectedShortfall{0.2}}, CostOfCapital{0.06}};
  EngineConfig cfg;
  cfg.families = {RiskFreeOnly{}, FixedMix{}};
  ::setenv("PRODVAL_THREADS", "1", 1);
  const std::vector<double> serial = backward_value(m, flows, cfg, cond).cost();
  ::setenv("PRODVAL_THREADS", "4", 1);
  const std::vector<double> threaded = backward_value(m, flows, cfg, cond).cost();
  ::unsetenv("PRODVAL_THREADS");
  ASSERT_EQ(serial.size(), threaded.size());
  for (std::size_t n = 0; n < serial.size(); ++n) {
    if (std::isnan(serial[n])) {
      EXPECT_TRUE(std::isnan(threaded[n]));
    } else {
      EXPECT_EQ(serial[n], threaded[n]) << "node " << n;
    }
  }
}

TEST(ProductionFlows, InflowAggregation) {
  ValuationProblem p = negative_cost();
  const NodeId n2 = node(p, "n2");
  p.flows.illiquid.inflow[n2] = 5.0;
  p.flows.extra_inflow.assign(p.model.tree.size(), 0.0);
  p.flows.extra_inflow[n2] = 2.0;
  EXPECT_DOUBLE_EQ(p.flows.inflow_at(n2), 107.0);
  EXPECT_DOUBLE_EQ(p.flows.outflow_at(node(p, "n1")), 10.0);
}
