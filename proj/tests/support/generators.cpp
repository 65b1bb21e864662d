#include "generators.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace prodval::testing {

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
int uniform_int(Rng& rng, int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }
bool coin(Rng& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

ScenarioTree random_tree(Rng& rng, int horizon, int steps, int max_branch) {
  const DateGrid grid = DateGrid::uniform(horizon, steps);
  std::vector<RawNode> nodes{{"n0", 0, std::nullopt, 1.0}};
  std::vector<std::size_t> frontier{0};
  for (std::size_t j = 1; j < grid.size(); ++j) {
    std::vector<std::size_t> next;
    for (std::size_t parent : frontier) {
      const int kids = uniform_int(rng, 1, max_branch);
      std::vector<double> w(kids);
      double total = 0.0;
      for (double& x : w) total += (x = uniform(rng, 0.2, 1.0));
      for (int c = 0; c < kids; ++c) {
        next.push_back(nodes.size());
        nodes.push_back({"n" + std::to_string(nodes.size()), j, nodes[parent].label, w[c] / total});
      }
    }
    frontier = std::move(next);
  }
  return build_tree(grid, std::move(nodes));
}

ScenarioTree binary_year_tree(int horizon, int branch) {
  const DateGrid grid = DateGrid::uniform(horizon, 2);
  std::vector<RawNode> nodes{{"n0", 0, std::nullopt, 1.0}};
  std::vector<std::size_t> frontier{0};
  for (std::size_t j = 1; j < grid.size(); ++j) {
    std::vector<std::size_t> next;
    const int kids = grid.is_annual(j - 1) ? branch : 1;
    for (std::size_t parent : frontier) {
      for (int c = 0; c < kids; ++c) {
        next.push_back(nodes.size());
        nodes.push_back({"n" + std::to_string(nodes.size()), j, nodes[parent].label, 1.0 / kids});
      }
    }
    frontier = std::move(next);
  }
  return build_tree(grid, std::move(nodes));
}

RandomMarket random_consistent_market(Rng& rng, const ScenarioTree& tree, int extra, bool close_out) {
  const int horizon = tree.grid().horizon();
  std::vector<Tradable> tradables;
  for (int i = 0; i < horizon; ++i) tradables.push_back({"bond" + std::to_string(i), i});
  for (int k = 0; k < extra; ++k) tradables.push_back({"risky" + std::to_string(k), std::nullopt});
  const std::size_t d = tradables.size();
  TradableSet market(tree.size(), std::move(tradables), close_out);

  RandomMarket out;
  out.edge_weights.assign(tree.size(), std::numeric_limits<double>::quiet_NaN());
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (tree.is_leaf(n)) continue;
    const double discount = uniform(rng, 0.96, 1.0);
    for (NodeId c : tree.children(n)) out.edge_weights[c] = tree.probability(c) * discount * uniform(rng, 0.7, 1.3);
  }
  const std::size_t last = tree.grid().size() - 1;
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (n == tree.root()) continue;
    for (int i = 0; i < horizon; ++i) {
      if (tree.is_annual(n) && tree.year_of(n) == i + 1) market.set_inflow(n, static_cast<std::size_t>(i), 1.0);
    }
    for (std::size_t k = static_cast<std::size_t>(horizon); k < d; ++k) {
      if (coin(rng, 0.4)) market.set_inflow(n, k, uniform(rng, 0.0, 0.1));
      if (tree.date_index(n) == last) market.set_price(n, k, uniform(rng, 0.5, 2.0));
    }
  }
  // Backward pricing; bonds are worth nothing from their maturity on.
  for (NodeId n = tree.size(); n-- > 0;) {
    if (tree.is_leaf(n)) continue;
    for (std::size_t k = 0; k < d; ++k) {
      if (k < static_cast<std::size_t>(horizon) && tree.date(n) >= Rational(static_cast<std::int64_t>(k) + 1)) continue;
      double s = 0.0;
      for (NodeId c : tree.children(n)) s += out.edge_weights[c] * (market.prices(c)[k] + market.inflows(c)[k]);
      market.set_price(n, k, s);
    }
  }
  out.market = std::move(market);
  return out;
}

TradableSet growth_market(Rng& rng, const ScenarioTree& tree, const std::vector<bool>& matures,
                          const std::function<double(NodeId)>& step_return, bool close_out) {
  std::vector<Tradable> tradables;
  for (std::size_t k = 0; k < matures.size(); ++k) tradables.push_back({"g" + std::to_string(k), std::nullopt});
  TradableSet market(tree.size(), std::move(tradables), close_out);
  const std::size_t last = tree.grid().size() - 1;
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (n == tree.root()) continue;
    for (std::size_t k = 0; k < matures.size(); ++k) {
      if (tree.date_index(n) == last) {
        market.set_price(n, k, matures[k] ? 0.0 : uniform(rng, 0.5, 2.0));
        market.set_inflow(n, k, matures[k] ? uniform(rng, 0.5, 2.0) : 0.0);
      } else if (coin(rng, 0.5)) {
        market.set_inflow(n, k, uniform(rng, 0.0, 0.1));
      }
    }
  }
  for (NodeId n = tree.size(); n-- > 0;) {
    if (tree.is_leaf(n)) continue;
    for (std::size_t k = 0; k < matures.size(); ++k) {
      double s = 0.0;
      for (NodeId c : tree.children(n)) s += tree.probability(c) * (market.prices(c)[k] + market.inflows(c)[k]) / step_return(c);
      market.set_price(n, k, s);
    }
  }
  return market;
}

Model make_model(ScenarioTree tree, TradableSet market) {
  Model m;
  m.tree = std::move(tree);
  m.market = std::move(market);
  m.market.validate(m.tree);
  m.restriction = RestrictionSet::full(m.market.count());
  m.rates = RateCurve::from_bonds(m.tree, m.market);
  return m;
}

LiabilitySpec random_liability(Rng& rng, const ScenarioTree& tree, double outflow_scale, double inflow_scale,
                               bool interior_flows) {
  LiabilitySpec l = LiabilitySpec::zeros(tree.size());
  for (NodeId n = 1; n < tree.size(); ++n) {
    if (!tree.is_annual(n) && !interior_flows) continue;
    l.outflow[n] = coin(rng, 0.8) ? uniform(rng, 0.0, outflow_scale) : 0.0;
    if (inflow_scale > 0.0 && coin(rng, 0.5)) l.inflow[n] = uniform(rng, 0.0, inflow_scale);
  }
  return l;
}

SelfFinancing random_self_financing(Rng& rng, const Model& model) {
  const ScenarioTree& tree = model.tree;
  const TradableSet& mk = model.market;
  const std::size_t d = mk.count();
  SelfFinancing sf{Strategy(tree, d, SignClass::NonNegative), CashflowProcess::zeros(tree.size())};
  const std::size_t last = tree.grid().size() - 1;
  for (NodeId n = 0; n < tree.size(); ++n) {
    Portfolio w(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      if (mk.prices(n)[k] > 0.0 && coin(rng, 0.7)) w[k] = uniform(rng, 0.0, 2.0);
    }
    if (n == tree.root()) {
      sf.strategy.set_out(n, w);
      continue;
    }
    const Portfolio& in = sf.strategy.out(tree.parent(n));
    const double resources = portfolio_price(mk, n, in) + portfolio_inflow(mk, n, in);
    const double value = portfolio_price(mk, n, w);
    if (tree.date_index(n) == last || value <= 0.0) {
      sf.flows.outflow[n] = resources;
      continue;
    }
    const double target = resources * uniform(rng, 0.5, 1.0);
    for (double& u : w) u *= target / value;
    sf.strategy.set_out(n, w);
    sf.flows.outflow[n] = std::max(0.0, resources - portfolio_price(mk, n, w));
  }
  return sf;
}

StopSet random_stop(Rng& rng, const ScenarioTree& tree, double stop_probability) {
  std::vector<NodeId> stops;
  std::vector<NodeId> stack(tree.children(tree.root()).begin(), tree.children(tree.root()).end());
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    if (coin(rng, stop_probability)) {
      stops.push_back(n);
      continue;
    }
    for (NodeId c : tree.children(n)) stack.push_back(c);
  }
  return StopSet(tree, std::move(stops));
}

Strategy zero_strategy(const Model& model) { return Strategy(model.tree, model.market.count(), SignClass::NonNegative); }

}  // namespace prodval::testing
