#pragma once

#include <cstddef>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <vector>

#include "prodval/distribution.hpp"
#include "prodval/rational.hpp"

namespace prodval {

using NodeId = std::size_t;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

class DateGrid {
 public:
  DateGrid() = default;
  // Validates: strictly increasing, starts at 0, ends at the integer
  // horizon T >= 1, contains every integer and one interior date per year.
  explicit DateGrid(std::vector<Rational> dates);
  static DateGrid uniform(int horizon, int steps_per_year);

  int horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return dates_.size(); }
  const std::vector<Rational>& dates() const noexcept { return dates_; }
  const Rational& date(std::size_t j) const { return dates_.at(j); }

  std::size_t index_of(const Rational& t) const;
  std::optional<std::size_t> find(const Rational& t) const;
  bool is_annual(std::size_t j) const { return dates_.at(j).is_integer(); }
  std::size_t year_index(int year) const { return year_index_.at(static_cast<std::size_t>(year)); }
  // Calendar year i with t in [i, i+1).
  int year_of(std::size_t j) const { return static_cast<int>(dates_.at(j).floor()); }

 private:
  std::vector<Rational> dates_;
  std::vector<std::size_t> year_index_;
  int horizon_ = 0;
};

// gamma(t): next grid date; gamma(T) = T + 1.
Rational successor_date(const DateGrid& grid, const Rational& t);

struct RawNode {
  std::string label;
  std::size_t date_index = 0;
  std::optional<std::string> parent;
  double probability = 1.0;
};

class ScenarioTree {
 public:
  using NodeRange = std::ranges::iota_view<NodeId, NodeId>;

  ScenarioTree() = default;

  const DateGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return date_index_.size(); }
  NodeId root() const noexcept { return 0; }

  std::size_t date_index(NodeId n) const { return date_index_.at(n); }
  const Rational& date(NodeId n) const { return grid_.date(date_index_.at(n)); }
  bool is_annual(NodeId n) const { return grid_.is_annual(date_index_.at(n)); }
  int year_of(NodeId n) const { return grid_.year_of(date_index_.at(n)); }
  NodeId parent(NodeId n) const { return parent_.at(n); }
  double probability(NodeId n) const { return probability_.at(n); }
  double path_probability(NodeId n) const { return path_probability_.at(n); }
  std::span<const NodeId> children(NodeId n) const;
  bool is_leaf(NodeId n) const { return child_begin_.at(n) == child_begin_.at(n + 1); }
  const std::string& label(NodeId n) const { return label_.at(n); }
  std::optional<NodeId> find(const std::string& label) const;

  // Nodes at grid date index j, as a contiguous id range.
  NodeRange nodes_at(std::size_t j) const;
  NodeRange nodes_in_year(int year) const { return nodes_at(grid_.year_index(year)); }

  NodeId ancestor_at(NodeId n, std::size_t j) const;
  // Annual ancestor-or-self of n: the node at date floor(t_n).
  NodeId annual_ancestor(NodeId n) const;
  bool is_ancestor_or_self(NodeId a, NodeId n) const;

  friend ScenarioTree build_tree(DateGrid grid, std::vector<RawNode> nodes);

 private:
  DateGrid grid_;
  std::vector<std::size_t> date_index_;
  std::vector<NodeId> parent_;
  std::vector<double> probability_;
  std::vector<double> path_probability_;
  std::vector<std::string> label_;
  std::vector<std::size_t> child_begin_;
  std::vector<NodeId> child_list_;
  std::vector<NodeId> date_begin_;
};

// Validates the node list and renumbers nodes breadth-first by date.
ScenarioTree build_tree(DateGrid grid, std::vector<RawNode> nodes);

struct Descendant {
  NodeId node;
  double probability;  // conditional on the starting node
};

// Descendants of n at grid index j >= date_index(n), in id order.
std::vector<Descendant> descendants_at(const ScenarioTree& tree, NodeId n, std::size_t j);

class AdaptedProcess {
 public:
  AdaptedProcess() = default;
  explicit AdaptedProcess(std::size_t size) : values_(size, 0.0), defined_(size, false) {}
  explicit AdaptedProcess(std::vector<double> values)
      : values_(std::move(values)), defined_(values_.size(), true) {}

  void set(NodeId n, double v) {
    values_.at(n) = v;
    defined_.at(n) = true;
  }
  bool defined(NodeId n) const { return n < defined_.size() && defined_[n]; }
  double at(NodeId n) const;
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
  std::vector<bool> defined_;
};

DiscreteDistribution conditional_distribution(const ScenarioTree& tree, NodeId n,
                                              const AdaptedProcess& process, std::size_t horizon_index);

}  // namespace prodval
