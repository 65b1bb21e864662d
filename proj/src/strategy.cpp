#include "prodval/strategy.hpp"

#include <algorithm>
#include <cmath>

#include "prodval/error.hpp"

namespace prodval {

Strategy::Strategy(const ScenarioTree& tree, std::size_t tradable_count, SignClass sign)
    : Strategy(tree, tradable_count, sign, 0, tree.grid().size() - 1) {}

Strategy::Strategy(const ScenarioTree& tree, std::size_t tradable_count, SignClass sign, std::size_t first,
                   std::size_t last)
    : tradable_count_(tradable_count),
      first_(first),
      last_(last),
      sign_(sign),
      out_(tree.size(), Portfolio(tradable_count, 0.0)),
      entry_(tree.size(), Portfolio(tradable_count, 0.0)) {
  if (first > last || last >= tree.grid().size()) fail(ErrorCode::SpanMismatch, "strategy span outside the grid");
}

bool Strategy::in_span(const ScenarioTree& tree, NodeId n) const {
  const std::size_t j = tree.date_index(n);
  return j >= first_ && j <= last_;
}

void Strategy::set_out(NodeId n, Portfolio p) {
  if (p.size() != tradable_count_) fail(ErrorCode::DimensionMismatch, "portfolio length differs from tradable count");
  out_.at(n) = std::move(p);
}

void Strategy::set_entry(NodeId n, Portfolio p) {
  if (p.size() != tradable_count_) fail(ErrorCode::DimensionMismatch, "portfolio length differs from tradable count");
  entry_.at(n) = std::move(p);
}

const Portfolio& Strategy::holding_into(const ScenarioTree& tree, NodeId n) const {
  if (!in_span(tree, n)) fail(ErrorCode::NodeOutsideSpan, "node '" + tree.label(n) + "' outside the strategy span");
  if (tree.date_index(n) == first_) return entry_.at(n);
  return out_.at(tree.parent(n));
}

Strategy Strategy::scaled(double factor) const {
  Strategy s = *this;
  for (Portfolio& p : s.out_) {
    for (double& v : p) v *= factor;
  }
  for (Portfolio& p : s.entry_) {
    for (double& v : p) v *= factor;
  }
  return s;
}

Strategy& Strategy::operator+=(const Strategy& other) {
  if (other.out_.size() != out_.size() || other.tradable_count_ != tradable_count_) {
    fail(ErrorCode::DimensionMismatch, "adding strategies of different shapes");
  }
  if (other.first_ != first_ || other.last_ != last_) fail(ErrorCode::SpanMismatch, "adding strategies with different spans");
  for (std::size_t n = 0; n < out_.size(); ++n) {
    for (std::size_t k = 0; k < tradable_count_; ++k) {
      out_[n][k] += other.out_[n][k];
      entry_[n][k] += other.entry_[n][k];
    }
  }
  return *this;
}

double conversion_residual(const Strategy& strategy, const TradableSet& market, const ScenarioTree& tree,
                           const CashflowProcess& flows, NodeId n) {
  const Portfolio& in = strategy.holding_into(tree, n);
  const double lhs = portfolio_price(market, n, strategy.out(n));
  const double rhs = portfolio_price(market, n, in) + portfolio_inflow(market, n, in) + flows.inflow.at(n) - flows.outflow.at(n);
  return lhs - rhs;
}

bool is_self_financing_at(const Strategy& strategy, const TradableSet& market, const ScenarioTree& tree,
                          const CashflowProcess& flows, NodeId n) {
  const double r = conversion_residual(strategy, market, tree, flows, n);
  return std::abs(flows.inflow.at(n) - flows.outflow.at(n)) <= 1e-9 && std::abs(r) <= 1e-9;
}

std::vector<bool> is_self_financing(const Strategy& strategy, const TradableSet& market, const ScenarioTree& tree,
                                    const CashflowProcess& flows) {
  std::vector<bool> out(tree.size(), false);
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (strategy.in_span(tree, n)) out[n] = is_self_financing_at(strategy, market, tree, flows, n);
  }
  return out;
}

double strategy_value(const Strategy& strategy, const TradableSet& market, const ScenarioTree& tree, NodeId n) {
  if (!strategy.in_span(tree, n)) fail(ErrorCode::NodeOutsideSpan, "node '" + tree.label(n) + "' outside the strategy span");
  return portfolio_price(market, n, strategy.out(n));
}

StopSet::StopSet(const ScenarioTree& tree, std::vector<NodeId> nodes) : nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  for (NodeId a : nodes_) {
    if (a >= tree.size()) fail(ErrorCode::StopNotAntichain, "stop node outside the tree");
    for (NodeId b : nodes_) {
      if (a != b && tree.is_ancestor_or_self(a, b)) {
        fail(ErrorCode::StopNotAntichain, "stop node '" + tree.label(a) + "' precedes stop node '" + tree.label(b) + "'");
      }
    }
  }
}

StopPhase StopSet::phase(const ScenarioTree& tree, NodeId n, std::size_t last_index) const {
  for (NodeId s : nodes_) {
    if (s == n) return StopPhase::At;
    if (tree.is_ancestor_or_self(s, n)) return StopPhase::After;
  }
  return tree.date_index(n) >= last_index ? StopPhase::At : StopPhase::Before;
}

CashflowProcess short_position_cashflows(const ShortPositionLiability& liability, const TradableSet& market,
                                         const ScenarioTree& tree) {
  const Strategy& phi = liability.underlying;
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (phi.in_span(tree, n) && liability.underlying_flows.inflow.at(n) != 0.0) {
      fail(ErrorCode::UnderlyingHasInflows, "underlying strategy receives inflows at '" + tree.label(n) + "'");
    }
  }
  CashflowProcess out = CashflowProcess::zeros(tree.size());
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (!phi.in_span(tree, n)) continue;
    const StopPhase phase = liability.pay_at_end
                                ? (tree.date_index(n) >= phi.last() ? StopPhase::At : StopPhase::Before)
                                : liability.stop.phase(tree, n, phi.last());
    if (phase == StopPhase::Before) {
      out.outflow[n] = liability.underlying_flows.outflow.at(n);
    } else if (phase == StopPhase::At) {
      const Portfolio& in = phi.holding_into(tree, n);
      out.outflow[n] = portfolio_price(market, n, in) + portfolio_inflow(market, n, in);
    }
  }
  return out;
}

Strategy stopped_strategy(const ShortPositionLiability& liability, const ScenarioTree& tree) {
  const Strategy& phi = liability.underlying;
  Strategy out(tree, phi.tradable_count(), phi.sign_class(), phi.first(), phi.last());
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (!phi.in_span(tree, n)) continue;
    if (tree.date_index(n) == phi.first()) out.set_entry(n, phi.entry(n));
    const StopPhase phase = liability.pay_at_end
                                ? (tree.date_index(n) >= phi.last() ? StopPhase::At : StopPhase::Before)
                                : liability.stop.phase(tree, n, phi.last());
    if (phase == StopPhase::Before) out.set_out(n, phi.out(n));
  }
  return out;
}

GeneralStrategyDecomposition decompose_general(const Strategy& strategy, const TradableSet& market,
                                               const ScenarioTree& tree) {
  if (!market.close_out()) fail(ErrorCode::CloseOutUnavailable, "short positions require close-out availability");
  GeneralStrategyDecomposition d;
  d.plus = Strategy(tree, strategy.tradable_count(), SignClass::NonNegative, strategy.first(), strategy.last());
  d.minus = d.plus;
  d.star = CashflowProcess::zeros(tree.size());
  auto split = [](const Portfolio& p, Portfolio& pos, Portfolio& neg) {
    pos.assign(p.size(), 0.0);
    neg.assign(p.size(), 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      pos[k] = std::max(0.0, p[k]);
      neg[k] = std::max(0.0, -p[k]);
    }
  };
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (!strategy.in_span(tree, n)) continue;
    Portfolio pos, neg;
    split(strategy.out(n), pos, neg);
    d.plus.set_out(n, pos);
    d.minus.set_out(n, neg);
    if (tree.date_index(n) == strategy.first()) {
      split(strategy.entry(n), pos, neg);
      d.plus.set_entry(n, pos);
      d.minus.set_entry(n, neg);
    }
  }
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (!strategy.in_span(tree, n)) continue;
    const Portfolio& neg_in = d.minus.holding_into(tree, n);
    d.star.outflow[n] = portfolio_price(market, n, neg_in) + portfolio_inflow(market, n, neg_in);
    if (tree.date_index(n) < strategy.last()) d.star.inflow[n] = portfolio_price(market, n, d.minus.out(n));
  }
  return d;
}

std::vector<RestrictionMembership> restriction_membership(const Strategy& strategy, const RestrictionSet& restriction,
                                                          const TradableSet& market, const ScenarioTree& tree) {
  std::vector<RestrictionMembership> out(tree.size());
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (!strategy.in_span(tree, n)) continue;
    const Portfolio& p = strategy.out(n);
    RestrictionMembership m;
    m.in_subspace = restriction.contains(p);
    m.non_negative = m.in_subspace && std::all_of(p.begin(), p.end(), [](double v) { return v >= 0.0; });
    m.value_non_negative = m.in_subspace && portfolio_price(market, n, p) >= -1e-9;
    out[n] = m;
  }
  return out;
}

}  // namespace prodval
