#include "prodval/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "prodval/error.hpp"
#include "prodval/parallel.hpp"

namespace prodval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

bool costs_tie(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

void require_size(const std::vector<double>& v, std::size_t n, const char* what) {
  if (v.size() != n) fail(ErrorCode::DimensionMismatch, std::string(what) + " does not cover every node");
}

}  // namespace

LiabilitySpec LiabilitySpec::zeros(std::size_t node_count) {
  return {std::vector<double>(node_count, 0.0), std::vector<double>(node_count, 0.0),
          std::vector<double>(node_count, 0.0)};
}

ProductionFlows ProductionFlows::for_liability(LiabilitySpec liability) {
  ProductionFlows f;
  const std::size_t n = liability.outflow.size();
  f.liability = std::move(liability);
  f.illiquid.inflow.assign(n, 0.0);
  return f;
}

double ProductionFlows::inflow_at(NodeId n) const {
  double z = liability.inflow.at(n) + illiquid.inflow.at(n);
  if (!extra_inflow.empty()) z += extra_inflow.at(n);
  return z;
}

void ProductionFlows::validate(const ScenarioTree& tree) const {
  const std::size_t n = tree.size();
  require_size(liability.outflow, n, "liability outflows");
  require_size(liability.inflow, n, "liability inflows");
  require_size(liability.terminal, n, "liability terminal values");
  require_size(illiquid.inflow, n, "illiquid inflows");
  if (!extra_inflow.empty()) require_size(extra_inflow, n, "extra inflows");
  for (NodeId k = 0; k < n; ++k) {
    const double vals[] = {liability.outflow[k], liability.inflow[k], illiquid.inflow[k],
                           extra_inflow.empty() ? 0.0 : extra_inflow[k]};
    for (double v : vals) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        fail(ErrorCode::SchemaViolation, "cash flows must be finite and non-negative at node '" + tree.label(k) + "'");
      }
    }
    if (!std::isfinite(liability.terminal[k])) fail(ErrorCode::SchemaViolation, "terminal value must be finite");
  }
}

const char* to_string(Mode mode) { return mode == Mode::A ? "A" : "B"; }

const char* to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::None: return "none";
    case FailureKind::Default: return "default";
    case FailureKind::CannotContinue: return "cannot-continue";
  }
  return "none";
}

std::string family_name(const StrategyFamily& family) {
  if (std::holds_alternative<RiskFreeOnly>(family)) return "risk_free";
  if (std::holds_alternative<FixedMix>(family)) return "fixed_mix";
  return "explicit";
}

Portfolio reinvest(const Model& model, NodeId n, double value, const ReinvestPolicy& policy) {
  std::size_t k = policy.tradable;
  if (policy.kind == ReinvestPolicy::Kind::RiskFree) {
    const auto bond = model.market.bond_for_year(model.tree.year_of(n));
    if (!bond) fail(ErrorCode::NoBondAvailable, "no risk-free bond for the year of node '" + model.tree.label(n) + "'");
    k = *bond;
  }
  if (k >= model.market.count()) fail(ErrorCode::DimensionMismatch, "reinvestment tradable out of range");
  Portfolio p(model.market.count(), 0.0);
  if (value == 0.0) return p;
  const double price = model.market.prices(n)[k];
  if (!(price > 0.0)) {
    fail(ErrorCode::InvalidTradable, "reinvestment tradable has no positive price at '" + model.tree.label(n) + "'");
  }
  p[k] = value / price;
  return p;
}

BalanceSheetRow balance_sheet(const Model& model, const ProductionFlows& flows, const Strategy& strategy,
                              const std::vector<double>& cost, NodeId n) {
  const ScenarioTree& tree = model.tree;
  if (!tree.is_annual(n) || tree.year_of(n) < 1) fail(ErrorCode::DateNotInGrid, "balance sheet needs an annual node at date >= 1");
  if (n >= cost.size() || std::isnan(cost[n])) fail(ErrorCode::MissingCost, "production cost missing at '" + tree.label(n) + "'");
  const Portfolio& in = strategy.holding_into(tree, n);
  const double v = cost[n];
  BalanceSheetRow row;
  row.node = n;
  const double tradables = portfolio_price(model.market, n, in) + portfolio_inflow(model.market, n, in);
  row.assets = tradables + flows.inflow_at(n) + positive_part(-v);
  row.liabilities = flows.outflow_at(n) + positive_part(v);
  row.capital_payoff = positive_part(row.assets - row.liabilities);
  row.failed = row.assets < row.liabilities - 1e-9;
  row.kind = detect_failure(row, tradables + flows.inflow_at(n) + positive_part(-v), flows.outflow_at(n));
  return row;
}

FailureKind detect_failure(const BalanceSheetRow& row, double tradable_resources, double outflow) {
  if (!(row.assets < row.liabilities - 1e-9)) return FailureKind::None;
  return tradable_resources < outflow - 1e-9 ? FailureKind::Default : FailureKind::CannotContinue;
}

namespace {

struct YearPlan {
  NodeId start = kNoNode;
  std::vector<NodeId> rebalance;  // start first, parents before children
  std::vector<std::size_t> rebalance_parent;
  std::vector<NodeId> ends;
  std::vector<std::size_t> end_parent;
  std::vector<double> probability;
  std::vector<double> state_price;
};

YearPlan plan_year(const Model& model, NodeId n, const FinanciabilitySpec& fin) {
  const ScenarioTree& tree = model.tree;
  const std::size_t end_index = tree.grid().year_index(tree.year_of(n) + 1);
  YearPlan plan;
  plan.start = n;
  plan.rebalance.push_back(n);
  plan.rebalance_parent.push_back(kNoNode);
  for (std::size_t pos = 0; pos < plan.rebalance.size(); ++pos) {
    for (NodeId c : tree.children(plan.rebalance[pos])) {
      if (tree.date_index(c) < end_index) {
        plan.rebalance.push_back(c);
        plan.rebalance_parent.push_back(pos);
      } else {
        plan.ends.push_back(c);
        plan.end_parent.push_back(pos);
      }
    }
  }
  const YearOutcomes outcomes = year_outcomes(tree, n, fin);
  // year_outcomes lists the same nodes in id order; align with plan.ends.
  for (NodeId m : plan.ends) {
    const auto it = std::find(outcomes.nodes.begin(), outcomes.nodes.end(), m);
    const auto k = static_cast<std::size_t>(it - outcomes.nodes.begin());
    plan.probability.push_back(outcomes.probability[k]);
    if (!outcomes.state_price.empty()) plan.state_price.push_back(outcomes.state_price[k]);
  }
  return plan;
}

// One parameterisation: base strategy plus a top-up amount invested by
// value weights and rebalanced at the year's interior dates.
struct Member {
  const Strategy* base = nullptr;
  Vector weights;  // empty: no top-up possible
};

struct MemberOutcome {
  bool feasible = false;
  double cost = kInf;
  double capital = 0.0;
  double value = 0.0;
  double top_up = 0.0;
  bool clamped = false;
  std::vector<double> surplus;
  std::vector<std::pair<NodeId, Portfolio>> portfolios;
};

double capital_rate(const Model& model, const FinanciabilitySpec& fin, NodeId n) {
  if (std::holds_alternative<CostOfCapital>(fin)) return model.rates.rate(n);
  return model.rates.has(n) ? model.rates.rate(n) : 0.0;
}

MemberOutcome evaluate_member(const Model& model, const ProductionFlows& flows, const YearPlan& plan,
                              const std::vector<double>& cost, const Member& member, const Conditions& cond, Mode mode,
                              double tol, bool keep_portfolios) {
  const TradableSet& mk = model.market;
  const std::size_t d = mk.count();
  const std::size_t nr = plan.rebalance.size();
  MemberOutcome out;

  // Top-up units per unit of value at each rebalancing node.
  std::vector<Vector> units(nr, Vector(d, 0.0));
  if (!member.weights.empty()) {
    for (std::size_t r = 0; r < nr; ++r) {
      const auto prices = mk.prices(plan.rebalance[r]);
      for (std::size_t k = 0; k < d; ++k) {
        if (member.weights[k] <= 0.0) continue;
        if (!(prices[k] > 0.0)) return out;
        units[r][k] = member.weights[k] / prices[k];
      }
    }
  }
  auto base_out = [&](NodeId t) -> const Portfolio* { return member.base ? &member.base->out(t) : nullptr; };
  auto dotp = [](const Portfolio* p, std::span<const double> v) { return p ? dot(*p, v) : 0.0; };

  // Top-up account value at rebalancing node r is alpha[r] * A + beta[r].
  std::vector<double> alpha(nr, 0.0), beta(nr, 0.0);
  alpha[0] = 1.0;
  double a_low = 0.0;
  double scale = 1.0;
  for (std::size_t r = 1; r < nr; ++r) {
    const NodeId c = plan.rebalance[r];
    const std::size_t pr = plan.rebalance_parent[r];
    const Vector pay = mk.payoff(c);
    const double g = dot(units[pr], pay);
    const double residual = dotp(base_out(plan.rebalance[pr]), pay) + flows.inflow_at(c) - flows.outflow_at(c) -
                            dotp(base_out(c), mk.prices(c));
    alpha[r] = alpha[pr] * g;
    beta[r] = beta[pr] * g + residual;
    scale = std::max({scale, std::abs(residual), flows.outflow_at(c)});
    if (alpha[r] > 1e-15) {
      a_low = std::max(a_low, -beta[r] / alpha[r]);
    } else if (beta[r] < -1e-9 * scale) {
      return out;
    }
  }

  const std::size_t ne = plan.ends.size();
  std::vector<double> a(ne), y0(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const NodeId m = plan.ends[e];
    const std::size_t pr = plan.end_parent[e];
    const Vector pay = mk.payoff(m);
    const double g = dot(units[pr], pay);
    const double next = cost.at(m);
    if (std::isnan(next) || next == kInf) return out;
    const double lnet = flows.outflow_at(m) + next - flows.inflow_at(m);
    a[e] = alpha[pr] * g;
    y0[e] = beta[pr] * g + dotp(base_out(plan.rebalance[pr]), pay) - lnet;
  }

  auto surplus_at = [&](double amount) {
    std::vector<double> s(ne);
    for (std::size_t e = 0; e < ne; ++e) s[e] = a[e] * amount + y0[e];
    return s;
  };
  auto fulfilled = [&](double amount) {
    return fulfillment_satisfied(cond.fulfillment, DiscreteDistribution(surplus_at(amount), plan.probability));
  };

  const double a_max = *std::max_element(a.begin(), a.end());
  const double a_min = *std::min_element(a.begin(), a.end());
  double amount = a_low;
  if (a_max > 0.0 && a_max - a_min <= 1e-12 * a_max) {
    // Translation invariance: rho(a*A + Y0) = rho(Y0) - a*A.
    const RiskMeasureSpec rho = fulfillment_measure(cond.fulfillment);
    const double needed = apply_measure(rho, DiscreteDistribution(y0, plan.probability)) / (0.5 * (a_max + a_min));
    if (!std::isfinite(needed)) return out;
    amount = std::max(amount, needed);
  } else if (!fulfilled(amount)) {
    if (a_max <= 0.0) return out;
    double lo = amount;
    double hi = std::max(1.0, 2.0 * lo);
    while (!fulfilled(hi)) {
      hi *= 2.0;
      if (hi > 1152921504606846976.0) return out;  // 2^60
    }
    for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (fulfilled(mid) ? hi : lo) = mid;
    }
    amount = hi;
  }
  if (member.weights.empty() && amount > 0.0) return out;

  out.surplus = surplus_at(amount);
  std::vector<double> payoff(ne);
  for (std::size_t e = 0; e < ne; ++e) payoff[e] = positive_part(out.surplus[e]);
  out.capital = max_capital(cond.financiability, payoff, plan.probability, plan.state_price,
                            capital_rate(model, cond.financiability, plan.start));
  out.top_up = amount;
  out.value = dotp(base_out(plan.start), mk.prices(plan.start)) + amount;
  out.cost = out.value - out.capital;
  if (mode == Mode::B && out.cost < 0.0) {
    out.capital = out.value;
    out.cost = 0.0;
    out.clamped = true;
  }
  out.feasible = true;
  if (keep_portfolios) {
    for (std::size_t r = 0; r < nr; ++r) {
      const double account = positive_part(alpha[r] * amount + beta[r]);
      Portfolio p = member.base ? member.base->out(plan.rebalance[r]) : Portfolio(d, 0.0);
      for (std::size_t k = 0; k < d; ++k) p[k] += account * units[r][k];
      out.portfolios.emplace_back(plan.rebalance[r], std::move(p));
    }
  }
  return out;
}

Vector unit_weights(std::size_t d, std::size_t k) {
  Vector w(d, 0.0);
  w[k] = 1.0;
  return w;
}

std::vector<std::size_t> mix_support(const Model& model, const FixedMix& mix) {
  if (!mix.tradables.empty()) {
    for (std::size_t k : mix.tradables) {
      if (k >= model.market.count()) fail(ErrorCode::DimensionMismatch, "fixed-mix tradable out of range");
      if (!model.restriction.contains(unit_weights(model.market.count(), k))) {
        fail(ErrorCode::SchemaViolation, "fixed-mix tradable outside the restriction");
      }
    }
    return mix.tradables;
  }
  if (!model.restriction.is_coordinate()) fail(ErrorCode::SchemaViolation, "fixed-mix search needs a coordinate restriction");
  return model.restriction.indices();
}

// Compositions of `total` into `parts` non-negative integers, lexicographic.
void compositions(std::size_t parts, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (cur.size() + 1 == parts) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = total; k >= 0; --k) {
    cur.push_back(k);
    compositions(parts, total - k, cur, out);
    cur.pop_back();
  }
}

struct Candidate {
  MemberOutcome outcome;
  Vector params;
};

bool better(const MemberOutcome& a, const Vector& pa, const MemberOutcome& b, const Vector& pb) {
  if (!a.feasible) return false;
  if (!b.feasible) return true;
  if (costs_tie(a.cost, b.cost)) return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  return a.cost < b.cost;
}

}  // namespace

OnePeriodResult build_one_period(const Model& model, const ProductionFlows& flows, NodeId n,
                                 const std::vector<double>& cost, const StrategyFamily& family,
                                 const Conditions& conditions, Mode mode, double bisection_tol) {
  const ScenarioTree& tree = model.tree;
  if (!tree.is_annual(n) || tree.year_of(n) >= tree.grid().horizon()) {
    fail(ErrorCode::DateNotInGrid, "one-period build needs an annual node before the horizon");
  }
  if (mode == Mode::A && !model.market.close_out()) fail(ErrorCode::CloseOutUnavailable, "mode A requires close-out");
  const YearPlan plan = plan_year(model, n, conditions.financiability);
  const std::size_t d = model.market.count();
  const int year = tree.year_of(n);

  Candidate best;
  auto consider = [&](const Member& member, Vector params) {
    MemberOutcome o = evaluate_member(model, flows, plan, cost, member, conditions, mode, bisection_tol, false);
    if (better(o, params, best.outcome, best.params)) best = {std::move(o), std::move(params)};
  };
  Member chosen;

  if (std::holds_alternative<RiskFreeOnly>(family)) {
    if (const auto bond = model.market.bond_for_year(year)) {
      chosen.weights = unit_weights(d, *bond);
      consider(chosen, {});
    }
  } else if (const auto* ex = std::get_if<ExplicitFamily>(&family)) {
    chosen.base = &ex->strategy;
    if (const auto bond = model.market.bond_for_year(year)) chosen.weights = unit_weights(d, *bond);
    consider(chosen, {});
  } else {
    const auto& mix = std::get<FixedMix>(family);
    const std::vector<std::size_t> support = mix_support(model, mix);
    if (support.empty()) fail(ErrorCode::SchemaViolation, "fixed-mix family has no tradables");
    const int resolution = std::max(1, mix.grid_resolution);
    auto weights_of = [&](const Vector& local) {
      Vector w(d, 0.0);
      for (std::size_t k = 0; k < support.size(); ++k) w[support[k]] = local[k];
      return w;
    };
    std::vector<std::vector<int>> grid;
    std::vector<int> cur;
    compositions(support.size(), resolution, cur, grid);
    for (const auto& g : grid) {
      Vector local(support.size());
      for (std::size_t k = 0; k < g.size(); ++k) local[k] = static_cast<double>(g[k]) / resolution;
      Member m;
      m.weights = weights_of(local);
      consider(m, m.weights);
    }
    // Dyadic refinement around the incumbent: move mass h between pairs.
    if (best.outcome.feasible) {
      double h = 1.0 / resolution;
      for (int depth = 1; depth <= mix.refine_depth; ++depth) {
        h *= 0.5;
        for (int sweep = 0; sweep < 64; ++sweep) {
          const Vector incumbent = best.params;
          bool improved = false;
          for (std::size_t from : support) {
            for (std::size_t to : support) {
              if (from == to || incumbent[from] < h - 1e-15) continue;
              Vector w = incumbent;
              w[from] = std::max(0.0, w[from] - h);
              w[to] += h;
              Member m;
              m.weights = w;
              MemberOutcome o = evaluate_member(model, flows, plan, cost, m, conditions, mode, bisection_tol, false);
              if (o.feasible && o.cost < best.outcome.cost && !costs_tie(o.cost, best.outcome.cost)) {
                best = {std::move(o), std::move(w)};
                improved = true;
              }
            }
          }
          if (!improved) break;
        }
      }
    }
    chosen.weights = best.params;
  }

  OnePeriodResult result;
  result.year_end = plan.ends;
  if (!best.outcome.feasible) {
    result.feasible = false;
    result.cost = kInf;
    return result;
  }
  if (std::holds_alternative<FixedMix>(family)) chosen.weights = best.params;
  const MemberOutcome full =
      evaluate_member(model, flows, plan, cost, chosen, conditions, mode, bisection_tol, true);
  result.feasible = true;
  result.cost = full.cost;
  result.capital = full.capital;
  result.value = full.value;
  result.top_up = full.top_up;
  result.clamped = full.clamped;
  result.parameters = best.params;
  result.portfolios = full.portfolios;
  result.surplus = full.surplus;
  return result;
}

std::vector<double> ProductionCostProcess::cost() const {
  std::vector<double> c(nodes.size(), kNaN);
  for (std::size_t n = 0; n < nodes.size(); ++n) c[n] = nodes[n].cost;
  return c;
}

bool ProductionCostProcess::feasible() const {
  return std::all_of(nodes.begin(), nodes.end(), [](const NodeValuation& v) { return v.feasible; });
}

ProductionCostProcess backward_value(const Model& model, const ProductionFlows& flows, const EngineConfig& config,
                                     const Conditions& conditions) {
  const ScenarioTree& tree = model.tree;
  flows.validate(tree);
  validate(conditions.fulfillment);
  validate(conditions.financiability);
  if (config.families.empty()) fail(ErrorCode::SchemaViolation, "no strategy family configured");
  if (config.mode == Mode::A && !model.market.close_out()) fail(ErrorCode::CloseOutUnavailable, "mode A requires close-out");

  ProductionCostProcess pcp;
  pcp.nodes.assign(tree.size(), NodeValuation{});
  for (NodeValuation& v : pcp.nodes) v.cost = kNaN;
  pcp.strategy = Strategy(tree, model.market.count(), SignClass::NonNegative);
  pcp.capital.capital.assign(tree.size(), 0.0);

  std::vector<double> cost(tree.size(), kNaN);
  const int horizon = tree.grid().horizon();
  for (NodeId n : tree.nodes_in_year(horizon)) {
    cost[n] = flows.liability.terminal.at(n);
    pcp.nodes[n].cost = cost[n];
  }

  for (int year = horizon - 1; year >= 0; --year) {
    const auto range = tree.nodes_in_year(year);
    const NodeId first = *range.begin();
    std::vector<OnePeriodResult> results(range.size());
    parallel_for(range.size(), [&](std::size_t k) {
      const NodeId n = first + k;
      OnePeriodResult best;
      best.cost = kInf;
      for (std::size_t f = 0; f < config.families.size(); ++f) {
        OnePeriodResult r =
            build_one_period(model, flows, n, cost, config.families[f], conditions, config.mode, config.bisection_tol);
        r.family = f;
        if (!r.feasible) continue;
        if (!best.feasible || (r.cost < best.cost && !costs_tie(r.cost, best.cost))) best = std::move(r);
      }
      results[k] = std::move(best);
    });
    for (std::size_t k = 0; k < results.size(); ++k) {
      const NodeId n = first + k;
      OnePeriodResult& r = results[k];
      NodeValuation& v = pcp.nodes[n];
      v.feasible = r.feasible;
      v.cost = r.feasible ? r.cost : kInf;
      v.capital = r.capital;
      v.value = r.value;
      v.top_up = r.top_up;
      v.clamped = r.clamped;
      v.family = r.family;
      v.parameters = r.parameters;
      cost[n] = v.cost;
      pcp.capital.capital[n] = r.feasible ? r.capital : 0.0;
      for (auto& [node, p] : r.portfolios) pcp.strategy.set_out(node, std::move(p));
    }
  }

  pcp.balance.assign(tree.size(), BalanceSheetRow{});
  for (int year = 1; year <= horizon; ++year) {
    for (NodeId n : tree.nodes_in_year(year)) pcp.balance[n] = balance_sheet(model, flows, pcp.strategy, cost, n);
  }
  return pcp;
}

std::vector<double> strategy_costs(const Model& model, const ProductionFlows& flows, const Strategy& strategy,
                                   const CapitalSchedule& capital) {
  const ScenarioTree& tree = model.tree;
  std::vector<double> cost(tree.size(), kNaN);
  const int horizon = tree.grid().horizon();
  for (int year = 0; year <= horizon; ++year) {
    for (NodeId n : tree.nodes_in_year(year)) {
      cost[n] = year == horizon ? flows.liability.terminal.at(n)
                                : portfolio_price(model.market, n, strategy.out(n)) - capital.capital.at(n);
    }
  }
  return cost;
}

ValidationReport validate_production_strategy(const Model& model, const ProductionFlows& flows, const Strategy& strategy,
                                              const CapitalSchedule& capital, const Conditions& conditions, Mode mode,
                                              ValidationSpan span, const std::vector<NodeId>* start_set) {
  const ScenarioTree& tree = model.tree;
  const TradableSet& mk = model.market;
  const int last_year = span.last_year < 0 ? tree.grid().horizon() : span.last_year;
  if (span.first_year < 0 || span.first_year >= last_year || last_year > tree.grid().horizon()) {
    fail(ErrorCode::SpanMismatch, "validation span is empty or outside the horizon");
  }
  if (strategy.first() > tree.grid().year_index(span.first_year) || strategy.last() < tree.grid().year_index(last_year)) {
    fail(ErrorCode::SpanMismatch, "strategy span does not cover the validation span");
  }
  if (capital.capital.size() != tree.size()) fail(ErrorCode::DimensionMismatch, "capital schedule does not cover the tree");
  if (strategy.sign_class() != SignClass::NonNegative && !mk.close_out()) {
    fail(ErrorCode::CloseOutUnavailable, "strategies with short positions require close-out");
  }
  flows.validate(tree);

  const std::vector<double> cost = strategy_costs(model, flows, strategy, capital);
  ValidationReport report;
  std::ostringstream first_failure;

  for (int year = span.first_year; year < last_year; ++year) {
    for (NodeId n : tree.nodes_in_year(year)) {
      ValidationNode row;
      row.node = n;
      const NodeId anchor = tree.ancestor_at(n, tree.grid().year_index(span.first_year));
      const bool in_start = !start_set || std::find(start_set->begin(), start_set->end(), anchor) != start_set->end();
      bool active = in_start;
      if (active && year > span.first_year) {
        active = !balance_sheet(model, flows, strategy, cost, n).failed;
      }
      row.checked = active;
      row.cost = cost[n];
      if (!active) {
        report.nodes.push_back(row);
        continue;
      }
      const YearPlan plan = plan_year(model, n, conditions.financiability);
      const double c_n = capital.capital.at(n);

      double min_value = portfolio_price(mk, n, strategy.out(n));
      for (NodeId t : plan.rebalance) {
        const Portfolio& p = strategy.out(t);
        const double value = portfolio_price(mk, t, p);
        min_value = std::min(min_value, value);
        if (strategy.sign_class() == SignClass::NonNegative) {
          for (double u : p) {
            if (u < -1e-12 * std::max(1.0, max_abs(p))) row.sign_ok = false;
          }
        } else if (value < -1e-9) {
          row.sign_ok = false;
        }
        if (t == n) continue;
        const Portfolio& in = strategy.out(tree.parent(t));
        const double rhs = portfolio_price(mk, t, in) + portfolio_inflow(mk, t, in) + flows.inflow_at(t) - flows.outflow_at(t);
        const double residual = value - rhs;
        const double tol = 1e-9 * std::max({1.0, std::abs(value), std::abs(rhs)});
        row.max_conversion_residual = std::max(row.max_conversion_residual, std::abs(residual));
        if (std::abs(residual) > tol || rhs < -tol) row.conversion_ok = false;
      }
      row.min_interior_value = min_value;
      if (c_n < 0.0) row.financiability_ok = false;

      std::vector<double> surplus(plan.ends.size()), payoff(plan.ends.size());
      for (std::size_t e = 0; e < plan.ends.size(); ++e) {
        const BalanceSheetRow b = balance_sheet(model, flows, strategy, cost, plan.ends[e]);
        surplus[e] = b.assets - b.liabilities;
        payoff[e] = b.capital_payoff;
      }
      row.worst_surplus = *std::min_element(surplus.begin(), surplus.end());
      row.capital = c_n;
      row.max_capital = max_capital(conditions.financiability, payoff, plan.probability, plan.state_price,
                                    capital_rate(model, conditions.financiability, n));
      row.financiability_ok = row.financiability_ok && c_n <= row.max_capital + 1e-9 * std::max(1.0, row.max_capital);
      row.fulfillment_ok = fulfillment_satisfied(conditions.fulfillment, DiscreteDistribution(surplus, plan.probability));
      row.mode_ok = mode == Mode::A || cost[n] >= -1e-9;
      if (!row.passed()) {
        report.passed = false;
        if (first_failure.tellp() == 0) {
          first_failure << "node '" << tree.label(n) << "':";
          if (!row.conversion_ok) first_failure << " conversion";
          if (!row.sign_ok) first_failure << " sign";
          if (!row.financiability_ok) first_failure << " financiability";
          if (!row.fulfillment_ok) first_failure << " fulfillment";
          if (!row.mode_ok) first_failure << " negative-cost";
        }
      }
      report.nodes.push_back(row);
    }
  }
  report.first_failure = first_failure.str();
  return report;
}

ShiftReport add_short_position(const Model& model, const ProductionFlows& flows, const ShortPositionLiability& shortpos,
                               const Strategy& base, const CapitalSchedule& capital, const Conditions& conditions,
                               Mode mode) {
  const ScenarioTree& tree = model.tree;
  if (!std::holds_alternative<FullFulfillment>(conditions.fulfillment)) {
    fail(ErrorCode::ValidationFailed, "short-position additivity is stated for full fulfillment");
  }
  if (!model.market.close_out()) fail(ErrorCode::CloseOutUnavailable, "short positions require close-out");
  const ValidationReport base_report = validate_production_strategy(model, flows, base, capital, conditions, mode);
  if (!base_report.passed) fail(ErrorCode::ValidationFailed, "base strategy does not validate: " + base_report.first_failure);

  const CashflowProcess short_flows = short_position_cashflows(shortpos, model.market, tree);
  const Strategy stopped = stopped_strategy(shortpos, tree);
  ProductionFlows combined = flows;
  for (NodeId n = 0; n < tree.size(); ++n) combined.liability.outflow[n] += short_flows.outflow[n];
  Strategy augmented = base;
  augmented += stopped;

  ShiftReport report;
  report.validation = validate_production_strategy(model, combined, augmented, capital, conditions, mode);
  const std::vector<double> before = strategy_costs(model, flows, base, capital);
  const std::vector<double> after = strategy_costs(model, combined, augmented, capital);
  for (int year = 0; year < tree.grid().horizon(); ++year) {
    for (NodeId n : tree.nodes_in_year(year)) {
      report.nodes.push_back(n);
      const double expected = portfolio_price(model.market, n, stopped.out(n));
      const double observed = after[n] - before[n];
      report.expected.push_back(expected);
      report.observed.push_back(observed);
      report.max_error = std::max(report.max_error, std::abs(observed - expected));
    }
  }
  report.passed = report.validation.passed && report.max_error <= 1e-9;
  return report;
}

ShiftReport illiquid_replica_shift(const Model& model, const ProductionFlows& flows, const Portfolio& psi,
                                   const Strategy& base, const CapitalSchedule& capital, const Conditions& conditions,
                                   Mode mode, const ReinvestPolicy& policy) {
  const ScenarioTree& tree = model.tree;
  const TradableSet& mk = model.market;
  if (psi.size() != mk.count()) fail(ErrorCode::DimensionMismatch, "psi length differs from tradable count");
  const TradablesAudit neutrality =
      audit_neutrality_to_tradables(conditions.financiability, mk, tree, model.restriction, model.rates);
  if (!neutrality.passed) fail(ErrorCode::NeutralityAuditFailed, "financiability is not neutral to the tradables");
  for (NodeId n : tree.nodes_in_year(tree.grid().horizon())) {
    if (std::abs(portfolio_price(mk, n, psi)) > 1e-12) {
      fail(ErrorCode::SchemaViolation, "psi must have zero value at the horizon");
    }
  }

  // xi restarts at zero every year and collects the inflows of xi + psi.
  Strategy xi(tree, mk.count(), SignClass::NonNegative);
  for (NodeId t = 0; t < tree.size(); ++t) {
    if (tree.is_annual(t)) continue;
    const Portfolio& in = xi.out(tree.parent(t));
    const double wealth = portfolio_price(mk, t, in) + portfolio_inflow(mk, t, in) + portfolio_inflow(mk, t, psi);
    xi.set_out(t, reinvest(model, t, wealth, policy));
  }

  ProductionFlows with_psi = flows;
  for (NodeId n = 0; n < tree.size(); ++n) with_psi.illiquid.inflow[n] += portfolio_inflow(mk, n, psi);
  Strategy augmented = base;
  augmented += xi;
  CapitalSchedule raised = capital;
  for (int year = 0; year < tree.grid().horizon(); ++year) {
    for (NodeId n : tree.nodes_in_year(year)) raised.capital[n] += portfolio_price(mk, n, psi);
  }

  ShiftReport report;
  report.validation = validate_production_strategy(model, with_psi, augmented, raised, conditions, mode);
  const std::vector<double> before = strategy_costs(model, flows, base, capital);
  const std::vector<double> after = strategy_costs(model, with_psi, augmented, raised);
  for (int year = 0; year < tree.grid().horizon(); ++year) {
    for (NodeId n : tree.nodes_in_year(year)) {
      report.nodes.push_back(n);
      const double expected = portfolio_price(mk, n, psi);
      const double observed = before[n] - after[n];
      report.expected.push_back(expected);
      report.observed.push_back(observed);
      report.max_error = std::max(report.max_error, std::abs(observed - expected));
    }
  }
  report.passed = report.validation.passed && report.max_error <= 1e-9;
  return report;
}

}  // namespace prodval
