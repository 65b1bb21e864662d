#include "prodval/resolution.hpp"

#include <algorithm>
#include <cmath>

#include "prodval/error.hpp"

namespace prodval {

namespace {

// lambda_{ceil(t-1)}: the previous annual factor at annual nodes, the
// current one inside the year.
double inflow_scale(const ScenarioTree& tree, const std::vector<double>& lambda, NodeId n) {
  if (tree.is_annual(n)) return n == tree.root() ? 1.0 : lambda[tree.annual_ancestor(tree.parent(n))];
  return lambda[tree.annual_ancestor(n)];
}

void require_finite_costs(const ScenarioTree& tree, const std::vector<double>& cost) {
  if (cost.size() != tree.size()) fail(ErrorCode::DimensionMismatch, "cost process does not cover the tree");
  for (int year = 0; year <= tree.grid().horizon(); ++year) {
    for (NodeId n : tree.nodes_in_year(year)) {
      if (!std::isfinite(cost[n])) {
        fail(ErrorCode::InfeasibleAtNode, "production cost is not finite at '" + tree.label(n) + "'");
      }
    }
  }
}

}  // namespace

ThetaPsi theta_psi_strategy(const Model& model, const IlliquidPortfolio& psi, const std::vector<double>& lambda,
                            const ReinvestPolicy& policy) {
  const ScenarioTree& tree = model.tree;
  const TradableSet& mk = model.market;
  if (psi.inflow.size() != tree.size() || lambda.size() != tree.size()) {
    fail(ErrorCode::DimensionMismatch, "illiquid inflows or factors do not cover the tree");
  }
  ThetaPsi theta{Strategy(tree, mk.count(), SignClass::NonNegative), CashflowProcess::zeros(tree.size())};
  for (NodeId n = 0; n < tree.size(); ++n) {
    const double excess = (1.0 - inflow_scale(tree, lambda, n)) * psi.inflow[n];
    theta.flows.inflow[n] = excess;
    double carried = 0.0;
    if (n != tree.root()) {
      const Portfolio& in = theta.strategy.out(tree.parent(n));
      carried = portfolio_price(mk, n, in) + portfolio_inflow(mk, n, in);
    }
    if (tree.is_annual(n)) {
      theta.flows.outflow[n] = carried + excess;
    } else if (carried + excess > 0.0) {
      theta.strategy.set_out(n, reinvest(model, n, carried + excess, policy));
    }
  }
  return theta;
}

AdjustmentResult adjustment_factors(const Model& model, const ProductionFlows& flows, const Strategy& strategy,
                                    const std::vector<double>& cost, const ReinvestPolicy& policy) {
  const ScenarioTree& tree = model.tree;
  require_finite_costs(tree, cost);
  flows.validate(tree);

  AdjustmentResult result;
  result.xi.assign(tree.size(), 1.0);
  result.lambda.assign(tree.size(), 1.0);
  result.original_balance.assign(tree.size(), BalanceSheetRow{});
  for (int year = 1; year <= tree.grid().horizon(); ++year) {
    for (NodeId n : tree.nodes_in_year(year)) result.original_balance[n] = balance_sheet(model, flows, strategy, cost, n);
  }

  // One forward pass over dates; X^theta_i uses lambda up to i-1.
  const std::size_t d = model.market.count();
  std::vector<Portfolio> theta_out(tree.size(), Portfolio(d, 0.0));
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (n == tree.root()) continue;
    const Portfolio& in = theta_out[tree.parent(n)];
    const double carried = portfolio_price(model.market, n, in) + portfolio_inflow(model.market, n, in);
    if (!tree.is_annual(n)) {
      result.lambda[n] = result.lambda[tree.annual_ancestor(n)];
      const double wealth = carried + (1.0 - result.lambda[n]) * flows.illiquid.inflow[n];
      if (wealth > 0.0) theta_out[n] = reinvest(model, n, wealth, policy);
      continue;
    }
    const double prev = result.lambda[tree.annual_ancestor(tree.parent(n))];
    const double x_theta = carried + (1.0 - prev) * flows.illiquid.inflow[n];
    const BalanceSheetRow& row = result.original_balance[n];
    double xi = 1.0;
    if (row.liabilities > 0.0 && prev > 0.0) {
      const double due = prev * row.liabilities;
      xi = std::clamp(std::min(due, prev * row.assets + x_theta) / due, 0.0, 1.0);
    }
    result.xi[n] = xi;
    result.lambda[n] = xi * prev;
  }
  result.theta = theta_psi_strategy(model, flows.illiquid, result.lambda, policy);
  result.iterations = 1;
  return result;
}

AdjustmentResult extend_to_full_fulfillment(const Model& model, const ProductionFlows& flows, const Strategy& strategy,
                                            const CapitalSchedule& capital, const std::vector<double>& cost,
                                            const Conditions& conditions, Mode mode, const ReinvestPolicy& policy) {
  const ScenarioTree& tree = model.tree;
  validate(conditions.financiability);
  if (capital.capital.size() != tree.size()) fail(ErrorCode::DimensionMismatch, "capital schedule does not cover the tree");

  AdjustmentResult result = adjustment_factors(model, flows, strategy, cost, policy);

  // Homogeneity audit on the year-end capital payoffs of the original strategy.
  std::vector<HomogeneitySample> samples;
  for (int year = 0; year < tree.grid().horizon(); ++year) {
    for (NodeId n : tree.nodes_in_year(year)) {
      const YearOutcomes out = year_outcomes(tree, n, conditions.financiability);
      HomogeneitySample s;
      for (NodeId m : out.nodes) s.payoff.push_back(result.original_balance[m].capital_payoff);
      s.probability = out.probability;
      s.state_price = out.state_price;
      s.rate = std::holds_alternative<CostOfCapital>(conditions.financiability) || model.rates.has(n)
                   ? model.rates.rate(n)
                   : 0.0;
      samples.push_back(std::move(s));
    }
  }
  const double factors[] = {0.0, 0.25, 0.5, 2.0, 3.0};
  if (!audit_positive_homogeneity(conditions.financiability, samples, factors).passed) {
    fail(ErrorCode::HomogeneityAuditFailed, "financiability condition is not positively homogeneous");
  }

  const std::vector<double>& lambda = result.lambda;
  ProductionFlows adjusted = flows;
  adjusted.extra_inflow.assign(tree.size(), 0.0);
  Strategy scaled = strategy;
  for (NodeId n = 0; n < tree.size(); ++n) {
    const double in_scale = inflow_scale(tree, lambda, n);
    const double current = lambda[tree.annual_ancestor(n)];
    adjusted.liability.inflow[n] = in_scale * flows.liability.inflow[n];
    adjusted.illiquid.inflow[n] = in_scale * flows.illiquid.inflow[n];
    adjusted.liability.outflow[n] = current * flows.liability.outflow[n];
    adjusted.liability.terminal[n] = current * flows.liability.terminal[n];
    adjusted.extra_inflow[n] = (flows.extra_inflow.empty() ? 0.0 : in_scale * flows.extra_inflow[n]) +
                               (tree.is_annual(n) ? result.theta.flows.outflow[n] : 0.0);
    if (strategy.in_span(tree, n)) {
      Portfolio p = strategy.out(n);
      for (double& u : p) u *= current;
      scaled.set_out(n, std::move(p));
    }
  }
  CapitalSchedule scaled_capital = capital;
  for (NodeId n = 0; n < tree.size(); ++n) scaled_capital.capital[n] = lambda[n] * capital.capital[n];

  result.flows = std::move(adjusted);
  result.strategy = std::move(scaled);
  result.capital = std::move(scaled_capital);
  result.cost = strategy_costs(model, result.flows, result.strategy, result.capital);

  const Conditions full{FullFulfillment{}, conditions.financiability};
  result.validation = validate_production_strategy(model, result.flows, result.strategy, result.capital, full, mode);

  for (int year = 0; year <= tree.grid().horizon(); ++year) {
    for (NodeId n : tree.nodes_in_year(year)) {
      const double err = std::abs(result.cost[n] - lambda[n] * cost[n]);
      result.max_scaling_error = std::max(result.max_scaling_error, err / std::max(1.0, std::abs(cost[n])));
      if (n != tree.root()) {
        const double prev = lambda[tree.annual_ancestor(tree.parent(n))];
        if (lambda[n] > prev + 1e-15 || lambda[n] < 0.0) result.monotone = false;
      }
    }
  }
  result.passed = result.validation.passed && result.monotone && result.max_scaling_error <= 1e-9;
  return result;
}

}  // namespace prodval
