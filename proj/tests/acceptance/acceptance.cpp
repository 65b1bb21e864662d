#include <cmath>
#include <algorithm>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "../support/generators.hpp"
#include "prodval/config.hpp"
#include "prodval/error.hpp"
#include "prodval/resolution.hpp"
#include "prodval/risk.hpp"
#include "prodval/solvency.hpp"

using namespace prodval;
using namespace prodval::testing;

namespace {

std::string data_path(const std::string& name) { return std::string(PRODVAL_DATA_DIR) + "/" + name; }

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x + 0.0);
  return buf;
}

ConsistencyCertificate certificate(const Model& m) { return check_consistency(m.market, m.tree, m.restriction); }

StatePriceBound certificate_weights(const Model& m) { return StatePriceBound{certificate(m).edge_weights(m.tree)}; }

double annual_error(const Model& m, const std::vector<double>& cost, const std::function<double(NodeId)>& expected) {
  double err = 0.0;
  for (int y = 0; y < m.tree.grid().horizon(); ++y) {
    for (NodeId n : m.tree.nodes_in_year(y)) err = std::max(err, std::abs(cost[n] - expected(n)));
  }
  return err;
}

Outcome intro_closed_form() {
  const double oracle = 99.12854030501089;
  const ValuationProblem p = load_config(data_path("two_point.json"));
  const ProductionCostProcess pcp = backward_value(p.model, p.flows, p.engine, p.conditions);
  const DiscreteDistribution l(std::vector<Atom>{{80.0, 0.5}, {120.0, 0.5}});
  const double s1 = stage1_value(l, 0.02, 0.06, ValueAtRisk{0.005}).value;
  const double cf = stage1_closed_form(l, 0.02, 0.06, ValueAtRisk{0.005});
  const double engine = pcp.nodes[p.model.tree.root()].cost;
  const double err = std::max({std::abs(engine - oracle), std::abs(s1 - oracle), std::abs(cf - oracle)});
  return {err <= 1e-8, "engine " + std::to_string(engine) + ", stage1 " + std::to_string(s1) + ", closed form " +
                           std::to_string(cf) + ", max error " + fmt(err)};
}

Outcome negative_cost() {
  ValuationProblem p = load_config(data_path("negative_cost.json"));
  p.engine.mode = Mode::A;
  const double a = backward_value(p.model, p.flows, p.engine, p.conditions).nodes[0].cost;
  p.engine.mode = Mode::B;
  const double b = backward_value(p.model, p.flows, p.engine, p.conditions).nodes[0].cost;
  const double oracle_a = 10.0 / 1.06 - 100.0 / (1.06 * 1.06);
  return {std::abs(a - oracle_a) <= 1e-9 && b == 10.0,
          "mode A " + std::to_string(a) + " (oracle " + std::to_string(oracle_a) + "), mode B " + std::to_string(b)};
}

// Random consistent instance with a short position on a random strategy.
struct ShortPositionInstance {
  Model model;
  ShortPositionLiability shortpos;
  Strategy stopped;
  ProductionFlows flows;
  Conditions conditions;
};

ShortPositionInstance short_position_instance(Rng& rng, bool close_out) {
  ShortPositionInstance t;
  ScenarioTree tree = random_tree(rng, uniform_int(rng, 1, 2), 2, 3);
  RandomMarket rm = random_consistent_market(rng, tree, uniform_int(rng, 1, 2), close_out);
  t.model = make_model(std::move(tree), std::move(rm.market));
  const SelfFinancing sf = random_self_financing(rng, t.model);
  t.shortpos = ShortPositionLiability{sf.strategy, sf.flows, random_stop(rng, t.model.tree, 0.15), false};
  const CashflowProcess cf = short_position_cashflows(t.shortpos, t.model.market, t.model.tree);
  LiabilitySpec l = LiabilitySpec::zeros(t.model.tree.size());
  l.outflow = cf.outflow;
  l.inflow = cf.inflow;
  t.flows = ProductionFlows::for_liability(l);
  t.stopped = stopped_strategy(t.shortpos, t.model.tree);
  t.conditions = {FullFulfillment{}, certificate_weights(t.model)};
  return t;
}

// Non-negative perturbation: self-financing inside each year, only shrinking at annual dates.
Strategy perturbation(Rng& rng, const Model& m) {
  const ScenarioTree& tree = m.tree;
  const std::size_t d = m.market.count();
  Strategy xi(tree, d, SignClass::NonNegative);
  const std::size_t last = tree.grid().size() - 1;
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (tree.date_index(n) == last) continue;
    Portfolio w(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      if (m.market.prices(n)[k] > 0.0 && coin(rng, 0.6)) w[k] = uniform(rng, 0.0, 1.0);
    }
    if (portfolio_price(m.market, n, w) <= 0.0) {
      const auto s = m.market.prices(n);
      w[static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin())] = 1.0;
    }
    const double value = portfolio_price(m.market, n, w);
    double target = uniform(rng, 0.0, 5.0);
    if (n != tree.root()) {
      const Portfolio& in = xi.out(tree.parent(n));
      const double resources = portfolio_price(m.market, n, in) + portfolio_inflow(m.market, n, in);
      target = tree.is_annual(n) ? resources * uniform(rng, 0.0, 1.0) : resources;
    }
    for (double& u : w) u *= target / value;
    xi.set_out(n, w);
  }
  return xi;
}

Outcome market_price_recovery() {
  Rng rng(3);
  double max_err = 0.0;
  int bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    ShortPositionInstance t = short_position_instance(rng, false);
    EngineConfig cfg;
    cfg.families = {RiskFreeOnly{}, ExplicitFamily{t.stopped}};
    const ProductionCostProcess pcp = backward_value(t.model, t.flows, cfg, t.conditions);
    const double err = annual_error(t.model, pcp.cost(), [&](NodeId n) {
      return portfolio_price(t.model.market, n, t.stopped.out(n));
    });
    max_err = std::max(max_err, err);
    if (!(err <= 1e-8)) ++bad;
  }
  // Admissible perturbations never undercut the market price.
  double worst_gap = 0.0;
  int invalid = 0;
  for (int trial = 0; trial < 200; ++trial) {
    ShortPositionInstance t = short_position_instance(rng, false);
    const ScenarioTree& tree = t.model.tree;
    Strategy theta = t.stopped;
    theta += perturbation(rng, t.model);
    CapitalSchedule cap{std::vector<double>(tree.size(), 0.0)};
    std::vector<double> cost(tree.size(), 0.0);
    const double u = uniform(rng, 0.0, 1.0);
    for (int y = tree.grid().horizon() - 1; y >= 0; --y) {
      for (NodeId n : tree.nodes_in_year(y)) {
        const YearOutcomes out = year_outcomes(tree, n, t.conditions.financiability);
        std::vector<double> payoff;
        for (NodeId mnode : out.nodes) payoff.push_back(balance_sheet(t.model, t.flows, theta, cost, mnode).capital_payoff);
        cap.capital[n] = u * max_capital(t.conditions.financiability, payoff, out.probability, out.state_price, 0.0);
        cost[n] = portfolio_price(t.model.market, n, theta.out(n)) - cap.capital[n];
      }
    }
    const ValidationReport rep =
        validate_production_strategy(t.model, t.flows, theta, cap, t.conditions, Mode::B);
    if (!rep.passed) ++invalid;
    for (int y = 0; y < tree.grid().horizon(); ++y) {
      for (NodeId n : tree.nodes_in_year(y)) {
        worst_gap = std::max(worst_gap, portfolio_price(t.model.market, n, t.stopped.out(n)) - cost[n]);
      }
    }
  }
  return {bad == 0 && max_err <= 1e-8 && worst_gap <= 1e-9 && invalid == 0,
          "recovery max error " + fmt(max_err) + " (" + std::to_string(bad) + " bad); perturbation max undercut " +
              fmt(worst_gap) + ", " + std::to_string(invalid) + " perturbations failed validation"};
}

Outcome adjusted_extension() {
  Rng rng(4);
  int failures = 0, with_failure = 0, solved = 0;
  double worst_scaling = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    for (int attempt = 0; attempt < 50; ++attempt) {
      ScenarioTree tree = random_tree(rng, 2, 2, 3);
      RandomMarket rm = random_consistent_market(rng, tree, 1, false);
      Model m = make_model(std::move(tree), std::move(rm.market));
      LiabilitySpec l = random_liability(rng, m.tree, 10.0, 2.0, true);
      for (NodeId n = 1; n < m.tree.size(); ++n) {
        if (m.tree.is_annual(n) && coin(rng, 0.3)) l.outflow[n] += uniform(rng, 50.0, 150.0);
      }
      ProductionFlows flows = ProductionFlows::for_liability(l);
      for (NodeId n = 1; n < m.tree.size(); ++n) {
        if (coin(rng, 0.3)) flows.illiquid.inflow[n] = uniform(rng, 0.0, 5.0);
      }
      const Conditions cond{RiskMeasureFulfillment{ValueAtRisk{0.3}}, CostOfCapital{0.06}};
      const ProductionCostProcess pcp = backward_value(m, flows, EngineConfig{}, cond);
      if (!pcp.feasible()) continue;
      const bool failing = std::any_of(pcp.balance.begin(), pcp.balance.end(), [](const BalanceSheetRow& r) { return r.failed; });
      if (!failing) continue;
      const AdjustmentResult adj = extend_to_full_fulfillment(m, flows, pcp.strategy, pcp.capital, pcp.cost(), cond, Mode::B);
      ++solved;
      if (std::any_of(adj.lambda.begin(), adj.lambda.end(), [](double x) { return x < 1.0; })) ++with_failure;
      worst_scaling = std::max(worst_scaling, adj.max_scaling_error);
      if (!adj.passed) ++failures;
      break;
    }
  }
  return {solved == 100 && failures == 0 && with_failure == 100,
          std::to_string(solved) + " instances with failure branches, " + std::to_string(with_failure) +
              " with lambda < 1, " + std::to_string(failures) + " failed; max scaling error " + fmt(worst_scaling)};
}

Outcome short_additivity() {
  Rng rng(5);
  int failures = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ShortPositionInstance t = short_position_instance(rng, true);
    LiabilitySpec l = random_liability(rng, t.model.tree, 10.0, 3.0, true);
    const ProductionFlows flows = ProductionFlows::for_liability(l);
    const Conditions cond{FullFulfillment{}, CostOfCapital{0.06}};
    const ProductionCostProcess pcp = backward_value(t.model, flows, EngineConfig{}, cond);
    const ShiftReport rep = add_short_position(t.model, flows, t.shortpos, pcp.strategy, pcp.capital, cond, Mode::B);
    worst = std::max(worst, rep.max_error);
    if (!rep.passed) ++failures;
  }
  return {failures == 0 && worst <= 1e-9, std::to_string(failures) + " of 100 failed; max error " + fmt(worst)};
}

Outcome illiquid_shift() {
  Rng rng(6);
  int failures = 0;
  double worst = 0.0;
  const double r = 0.02, eta = 0.06;
  for (int trial = 0; trial < 50; ++trial) {
    ScenarioTree tree = random_tree(rng, uniform_int(rng, 1, 2), 2, 3);
    const ScenarioTree* tp = &tree;
    TradableSet mk = growth_market(rng, tree, {true, false}, [&](NodeId c) { return tp->is_annual(c) ? 1.0 + r + eta : 1.0; }, true);
    Model m = make_model(std::move(tree), std::move(mk));
    m.rates = RateCurve::flat(m.tree, r);
    const ProductionFlows flows = ProductionFlows::for_liability(random_liability(rng, m.tree, 10.0, 3.0, true));
    const Conditions cond{FullFulfillment{}, CostOfCapital{eta}};
    EngineConfig cfg;
    cfg.mode = Mode::A;
    cfg.families = {FixedMix{{0, 1}, 4, 2}};
    const ProductionCostProcess pcp = backward_value(m, flows, cfg, cond);
    const Portfolio psi{uniform(rng, 0.5, 3.0), 0.0};
    const ShiftReport rep = illiquid_replica_shift(m, flows, psi, pcp.strategy, pcp.capital, cond, Mode::A,
                                                   ReinvestPolicy{ReinvestPolicy::Kind::Tradable, 1});
    worst = std::max(worst, rep.max_error);
    if (!rep.passed) ++failures;
  }
  return {failures == 0 && worst <= 1e-9, std::to_string(failures) + " of 50 failed; max error " + fmt(worst)};
}

DiscreteDistribution random_distribution(Rng& rng) {
  const int n = uniform_int(rng, 1, 8);
  std::vector<double> v(n), p(n);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    v[k] = uniform(rng, -100.0, 100.0);
    total += (p[k] = uniform(rng, 0.01, 1.0));
  }
  for (double& x : p) x /= total;
  return DiscreteDistribution(v, p);
}

Outcome risk_axioms() {
  Rng rng(7);
  double worst = 0.0;
  int order_violations = 0, safety_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const DiscreteDistribution y = random_distribution(rng);
    const double a1 = uniform(rng, 0.001, 0.5), a2 = uniform(rng, 0.001, 0.5);
    const double c = uniform(rng, -50.0, 50.0), k = uniform(rng, 0.1, 10.0);
    const RiskMeasureSpec specs[] = {FullMeasure{}, ValueAtRisk{a1}, ExpectedShortfall{a1}};
    for (const RiskMeasureSpec& s : specs) {
      const double base = apply_measure(s, y);
      worst = std::max(worst, std::abs(apply_measure(s, y.shifted(c)) - (base - c)));
      worst = std::max(worst, std::abs(apply_measure(s, y.scaled(k)) - k * base));
    }
    if (expected_shortfall(y, a1) < value_at_risk(y, a1) - 1e-12) ++order_violations;
    const double lo = std::min(a1, a2), hi = std::max(a1, a2);
    if (expected_shortfall(y, lo) < expected_shortfall(y, hi) - 1e-12) ++order_violations;
  }
  for (int trial = 0; trial < 200; ++trial) {
    DiscreteDistribution y = random_distribution(rng);
    y = y.shifted(expected_shortfall(y, 0.01) + uniform(rng, 1e-6, 20.0));
    double beta = 0.0;
    for (const Atom& a : y.atoms()) {
      if (a.value < 0.0) beta += a.probability;
    }
    if (expected_shortfall(y, 0.01) > 0.0 || value_at_risk(y, 0.5 * (beta + 0.01)) > 0.0) ++safety_violations;
  }
  return {worst <= 1e-12 && order_violations == 0 && safety_violations == 0,
          "max axiom error " + fmt(worst) + ", " + std::to_string(order_violations) + " ordering and " +
              std::to_string(safety_violations) + " safety-level violations"};
}

Outcome risk_margin_formula() {
  const double r = 0.02, eta = 0.06;
  const double scr[] = {10.0, 8.0, 5.0};
  const ScenarioTree tree = binary_year_tree(3, 2);
  // Symmetric outflows X = 50 +/- (1+r+eta) SCR give exactly that SCR.
  LiabilitySpec l = LiabilitySpec::zeros(tree.size());
  for (int year = 1; year <= 3; ++year) {
    const double spread = (1.0 + r + eta) * scr[year - 1];
    int k = 0;
    for (NodeId n : tree.nodes_in_year(year)) l.outflow[n] = 50.0 + ((k++ % 2) == 0 ? spread : -spread);
  }
  Model m;
  m.tree = tree;
  m.rates = RateCurve::flat(m.tree, r);
  const SolvencyReport rep = multi_period_solvency(m, l, eta, ValueAtRisk{0.005}, 3);
  const double oracle = eta * (10.0 / 1.02 + 8.0 / (1.02 * 1.02) + 5.0 / (1.02 * 1.02 * 1.02));
  const double rm0 = rep.find(m.tree.root())->rm;
  const double err = std::max(std::abs(rm0 - oracle), rep.rm_error);
  return {rep.rm_cross_checked && err <= 1e-12,
          "RM_0 " + std::to_string(rm0) + ", summation " + std::to_string(oracle) + ", error " + fmt(err)};
}

Outcome stage_ordering() {
  Rng rng(9);
  double worst_order = 0.0, worst_coherence = 0.0;
  int coherent_cases = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = uniform_int(rng, 2, 6);
    PeriodOutcomes o;
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
      total += o.probability.emplace_back(uniform(rng, 0.05, 1.0));
      o.outflow.push_back(uniform(rng, 0.0, 100.0));
      o.bel.push_back(uniform(rng, 0.0, 50.0));
      o.rm.push_back(uniform(rng, 0.0, 5.0));
    }
    double pmin = 1.0;
    for (double& p : o.probability) pmin = std::min(pmin, p /= total);
    const double r = uniform(rng, -0.01, 0.05), eta = uniform(rng, 0.0, 0.1);
    const bool coherent = trial % 2 == 0;
    const double alpha = coherent ? 0.5 * pmin : uniform(rng, 0.005, 0.3);
    const RiskMeasureSpec rho = coin(rng, 0.5) ? RiskMeasureSpec{ValueAtRisk{alpha}} : RiskMeasureSpec{ExpectedShortfall{alpha}};
    const StageDecomposition s2 = stage2_decompose(o, r, eta, rho);
    const StageDecomposition s3 = stage3_decompose(o, r, eta, rho);
    worst_order = std::max(worst_order, s2.total() - s3.total());
    std::vector<double> l(n);
    for (int k = 0; k < n; ++k) l[k] = o.outflow[k] + o.bel[k] + o.rm[k];
    const Stage1Result s1 = stage1_value(DiscreteDistribution(l, o.probability), r, eta, rho);
    if (s1.prob_m1 >= 1.0 && s2.prob_m1 >= 1.0) {
      ++coherent_cases;
      worst_coherence = std::max({worst_coherence, std::abs(s1.value - s2.total()), std::abs(s2.total() - s3.total())});
    }
  }
  return {worst_order <= 1e-12 && worst_coherence <= 1e-9 && coherent_cases >= 100,
          "max stage-2 excess " + fmt(worst_order) + "; " + std::to_string(coherent_cases) +
              " coherent cases, max disagreement " + fmt(worst_coherence)};
}

Outcome consistency_certificates() {
  Rng rng(10);
  int bad = 0, violations = 0, certificates = 0;
  for (int trial = 0; trial < 200; ++trial) {
    ScenarioTree tree = random_tree(rng, uniform_int(rng, 1, 2), 2, 3);
    RandomMarket rm = random_consistent_market(rng, tree, uniform_int(rng, 1, 2), false);
    if (trial % 2 == 1) {
      // Distort prices at a few nodes; the result may or may not stay consistent.
      for (NodeId n = 0; n < tree.size(); ++n) {
        if (tree.is_leaf(n) || !coin(rng, 0.3)) continue;
        for (std::size_t k = 0; k < rm.market.count(); ++k) {
          const double s = rm.market.prices(n)[k];
          if (s > 0.0) rm.market.set_price(n, k, s * uniform(rng, 0.3, 1.7));
        }
      }
    }
    const ConsistencyCertificate cert = check_consistency(rm.market, tree, RestrictionSet::full(rm.market.count()));
    for (const NodeCertificate& c : cert.nodes) {
      const auto kids = tree.children(c.node);
      const auto s = rm.market.prices(c.node);
      double scale = 1.0;
      for (double x : s) scale = std::max(scale, std::abs(x));
      if (c.consistent) {
        ++certificates;
        for (std::size_t k = 0; k < s.size(); ++k) {
          double rec = 0.0;
          for (std::size_t j = 0; j < kids.size(); ++j) rec += c.weights[j] * rm.market.payoff(kids[j])[k];
          if (std::abs(rec - s[k]) > 1e-9 * scale) ++bad;
        }
        for (double w : c.weights) {
          if (w < 0.0) ++bad;
        }
      } else {
        ++violations;
        if (!(dot(c.violation, s) < 0.0)) ++bad;
        for (NodeId kid : kids) {
          if (dot(c.violation, rm.market.payoff(kid)) < -1e-9) ++bad;
        }
      }
    }
  }
  const ValuationProblem p = load_config(data_path("inconsistent_market.json"));
  const bool refuted = !check_consistency(p.model.market, p.model.tree, p.model.restriction).consistent();
  return {bad == 0 && refuted && violations > 0,
          std::to_string(certificates) + " certificates, " + std::to_string(violations) + " violations, " +
              std::to_string(bad) + " bad; fixture " + (refuted ? "refuted" : "NOT refuted")};
}

Outcome nonnegative_cost() {
  Rng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ScenarioTree tree = random_tree(rng, uniform_int(rng, 1, 2), 2, 3);
    RandomMarket rm = random_consistent_market(rng, tree, uniform_int(rng, 1, 2), true);
    Model m = make_model(std::move(tree), std::move(rm.market));
    LiabilitySpec l = random_liability(rng, m.tree, 10.0, 0.0, true);
    for (NodeId n = 0; n < m.tree.size(); ++n) l.inflow[n] = l.outflow[n] * uniform(rng, 0.0, 1.0);
    const Conditions cond{FullFulfillment{}, certificate_weights(m)};
    EngineConfig cfg;
    cfg.mode = Mode::A;
    const ProductionCostProcess pcp = backward_value(m, ProductionFlows::for_liability(l), cfg, cond);
    for (int y = 0; y < m.tree.grid().horizon(); ++y) {
      for (NodeId n : m.tree.nodes_in_year(y)) worst = std::max(worst, -pcp.nodes[n].cost);
    }
  }
  return {worst <= 1e-9, "most negative production cost " + fmt(-worst)};
}

}  // namespace

int main() {
  const std::pair<const char*, Outcome (*)()> criteria[] = {
      {"intro closed form", intro_closed_form},
      {"negative production cost", negative_cost},
      {"market-price recovery and lower bound", market_price_recovery},
      {"full-fulfillment extension of adjusted liabilities", adjusted_extension},
      {"short-position additivity", short_additivity},
      {"illiquid replica shift", illiquid_shift},
      {"risk-measure axioms", risk_axioms},
      {"risk-margin summation formula", risk_margin_formula},
      {"stage ordering and coherence", stage_ordering},
      {"consistency certificates", consistency_certificates},
      {"non-negative cost for net outflows", nonnegative_cost},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    Outcome o{false, ""};
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::printf("[%s] %2d %s: %s\n", o.passed ? "PASS" : "FAIL", index, name, o.detail.c_str());
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
