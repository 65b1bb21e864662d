#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prodval/lattice.hpp"
#include "prodval/linalg.hpp"

namespace prodval {

using Portfolio = std::vector<double>;

struct Tradable {
  std::string name;
  // Set when the tradable is the one-year zero-coupon bond bought at the
  // annual date `bond_period` and paying 1 at bond_period + 1.
  std::optional<int> bond_period;
};

class TradableSet {
 public:
  TradableSet() = default;
  TradableSet(std::size_t node_count, std::vector<Tradable> tradables, bool close_out = false);

  std::size_t count() const noexcept { return tradables_.size(); }
  std::size_t node_count() const noexcept { return node_count_; }
  const std::vector<Tradable>& tradables() const noexcept { return tradables_; }
  bool close_out() const noexcept { return close_out_; }
  void set_close_out(bool v) noexcept { close_out_ = v; }

  void set_price(NodeId n, std::size_t k, double v) { prices_.at(n * count() + k) = v; }
  void set_inflow(NodeId n, std::size_t k, double v) { inflows_.at(n * count() + k) = v; }
  std::span<const double> prices(NodeId n) const { return {prices_.data() + n * count(), count()}; }
  std::span<const double> inflows(NodeId n) const { return {inflows_.data() + n * count(), count()}; }
  // S_n + Z~_n
  Vector payoff(NodeId n) const;

  std::optional<std::size_t> bond_for_year(int year) const;

  // Non-negativity, non-zero price vectors, bond conventions.
  void validate(const ScenarioTree& tree) const;

 private:
  std::size_t node_count_ = 0;
  std::vector<Tradable> tradables_;
  std::vector<double> prices_;
  std::vector<double> inflows_;
  bool close_out_ = false;
};

double portfolio_price(const TradableSet& market, NodeId n, std::span<const double> portfolio);
double portfolio_inflow(const TradableSet& market, NodeId n, std::span<const double> portfolio);

// Linear subspace R of portfolio space, either spanned by coordinate axes or
// by explicit basis vectors (rows of `basis`).
class RestrictionSet {
 public:
  RestrictionSet() = default;
  static RestrictionSet full(std::size_t ambient);
  static RestrictionSet coordinates(std::size_t ambient, std::vector<std::size_t> indices);
  static RestrictionSet from_basis(Matrix basis);

  std::size_t ambient_dim() const noexcept { return basis_.cols(); }
  std::size_t dim() const noexcept { return basis_.rows(); }
  bool is_coordinate() const noexcept { return coordinate_; }
  bool is_full() const noexcept { return coordinate_ && dim() == ambient_dim(); }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  const Matrix& basis() const noexcept { return basis_; }

  // Coordinates of B v: the functional v seen on the subspace.
  Vector restrict_functional(std::span<const double> v) const { return basis_.multiply(v); }
  // Portfolio sum_k y_k b_k.
  Portfolio embed(std::span<const double> coords) const { return basis_.multiply_transposed(coords); }
  bool contains(std::span<const double> portfolio, double tol = 1e-9) const;

 private:
  Matrix basis_;
  std::vector<std::size_t> indices_;
  bool coordinate_ = true;
};

struct NodeCertificate {
  NodeId node = kNoNode;
  bool consistent = false;
  Vector weights;     // per child, when consistent
  Portfolio violation;  // ambient coordinates, when not consistent
  double residual = 0.0;  // relative reconstruction error, or x.S_node for a violation
};

struct ConsistencyCertificate {
  std::vector<NodeCertificate> nodes;  // non-terminal nodes in id order

  bool consistent() const;
  const NodeCertificate* find(NodeId n) const;
  // lambda of the edge into each child node; NaN for the root and for
  // children of inconsistent nodes.
  std::vector<double> edge_weights(const ScenarioTree& tree) const;
};

NodeCertificate check_node_consistency(const TradableSet& market, const ScenarioTree& tree,
                                       const RestrictionSet& restriction, NodeId n);
ConsistencyCertificate check_consistency(const TradableSet& market, const ScenarioTree& tree,
                                         const RestrictionSet& restriction);

// One-period risk-free rates r_{i,i+1} per node, carried by every node of
// the year.
class RateCurve {
 public:
  RateCurve() = default;
  static RateCurve flat(const ScenarioTree& tree, double r);
  static RateCurve from_bonds(const ScenarioTree& tree, const TradableSet& market);
  // Values given at annual nodes (NaN elsewhere) are spread over each year.
  static RateCurve from_annual(const ScenarioTree& tree, std::vector<double> annual_rates);

  bool empty() const noexcept { return rates_.empty(); }
  bool has(NodeId n) const;
  double rate(NodeId n) const;

 private:
  std::vector<double> rates_;
};

}  // namespace prodval

namespace prodval {

// Everything a valuation needs to know about the world besides the
// liability: scenarios, tradables, admissible subspace and rates.
struct Model {
  ScenarioTree tree;
  TradableSet market;
  RestrictionSet restriction;
  RateCurve rates;
};

}  // namespace prodval
