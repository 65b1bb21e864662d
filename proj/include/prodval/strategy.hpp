#pragma once

#include <vector>

#include "prodval/lattice.hpp"
#include "prodval/market.hpp"

namespace prodval {

struct CashflowProcess {
  std::vector<double> inflow;   // Z~ per node
  std::vector<double> outflow;  // X per node

  static CashflowProcess zeros(std::size_t node_count) {
    return {std::vector<double>(node_count, 0.0), std::vector<double>(node_count, 0.0)};
  }
};

enum class SignClass { NonNegative, ValueNonNegative, Unrestricted };

// Predictable portfolio process on the grid indices [first, last]. out(n) is
// the portfolio chosen at n and held over (t_n, gamma(t_n)]; for nodes at
// `last` it is the gamma(t_max) convention and normally zero. entry(n) is
// the portfolio held into a node at `first`.
class Strategy {
 public:
  Strategy() = default;
  Strategy(const ScenarioTree& tree, std::size_t tradable_count, SignClass sign = SignClass::NonNegative);
  Strategy(const ScenarioTree& tree, std::size_t tradable_count, SignClass sign, std::size_t first, std::size_t last);

  std::size_t tradable_count() const noexcept { return tradable_count_; }
  std::size_t node_count() const noexcept { return out_.size(); }
  std::size_t first() const noexcept { return first_; }
  std::size_t last() const noexcept { return last_; }
  SignClass sign_class() const noexcept { return sign_; }
  void set_sign_class(SignClass s) noexcept { sign_ = s; }

  bool in_span(const ScenarioTree& tree, NodeId n) const;
  const Portfolio& out(NodeId n) const { return out_.at(n); }
  void set_out(NodeId n, Portfolio p);
  const Portfolio& entry(NodeId n) const { return entry_.at(n); }
  void set_entry(NodeId n, Portfolio p);
  // phi_t: the portfolio carried into n.
  const Portfolio& holding_into(const ScenarioTree& tree, NodeId n) const;

  Strategy scaled(double factor) const;
  Strategy& operator+=(const Strategy& other);

 private:
  std::size_t tradable_count_ = 0;
  std::size_t first_ = 0;
  std::size_t last_ = 0;
  SignClass sign_ = SignClass::NonNegative;
  std::vector<Portfolio> out_;
  std::vector<Portfolio> entry_;
};

// out(n).S_n - (phi_n.S_n + Z~^phi_n + Z~_n - X_n)
double conversion_residual(const Strategy& strategy, const TradableSet& market, const ScenarioTree& tree,
                           const CashflowProcess& flows, NodeId n);
bool is_self_financing_at(const Strategy& strategy, const TradableSet& market, const ScenarioTree& tree,
                          const CashflowProcess& flows, NodeId n);
// Per node; false outside the span.
std::vector<bool> is_self_financing(const Strategy& strategy, const TradableSet& market, const ScenarioTree& tree,
                                    const CashflowProcess& flows);
double strategy_value(const Strategy& strategy, const TradableSet& market, const ScenarioTree& tree, NodeId n);

enum class StopPhase { Before, At, After };

// Stopping time given by an antichain of nodes; paths that never reach the
// set stop at the last date of the span.
class StopSet {
 public:
  StopSet() = default;
  StopSet(const ScenarioTree& tree, std::vector<NodeId> nodes);
  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }
  StopPhase phase(const ScenarioTree& tree, NodeId n, std::size_t last_index) const;

 private:
  std::vector<NodeId> nodes_;
};

struct ShortPositionLiability {
  Strategy underlying;
  CashflowProcess underlying_flows;  // outflows X paid by the underlying; inflows must vanish
  StopSet stop;
  bool pay_at_end = false;           // liquidation value paid at t_max instead of tau
};

CashflowProcess short_position_cashflows(const ShortPositionLiability& liability, const TradableSet& market,
                                         const ScenarioTree& tree);
// phi' = phi while strictly before the stop, 0 from the stop on.
Strategy stopped_strategy(const ShortPositionLiability& liability, const ScenarioTree& tree);

struct GeneralStrategyDecomposition {
  Strategy plus;
  Strategy minus;
  CashflowProcess star;  // X^{L*}, Z~^{L*}
};

GeneralStrategyDecomposition decompose_general(const Strategy& strategy, const TradableSet& market,
                                               const ScenarioTree& tree);

struct RestrictionMembership {
  bool in_subspace = false;      // R
  bool non_negative = false;     // R^{>=0}
  bool value_non_negative = false;  // R'
};

std::vector<RestrictionMembership> restriction_membership(const Strategy& strategy, const RestrictionSet& restriction,
                                                          const TradableSet& market, const ScenarioTree& tree);

}  // namespace prodval
