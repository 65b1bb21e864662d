#include "prodval/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "prodval/error.hpp"

namespace prodval {

DateGrid::DateGrid(std::vector<Rational> dates) : dates_(std::move(dates)) {
  if (dates_.size() < 2) fail(ErrorCode::MissingInteriorDate, "date grid needs at least 0, an interior date and T");
  if (dates_.front() != Rational(0)) fail(ErrorCode::DateNotInGrid, "date grid must start at 0");
  for (std::size_t j = 1; j < dates_.size(); ++j) {
    if (!(dates_[j - 1] < dates_[j])) fail(ErrorCode::DateNotInGrid, "dates must be strictly increasing");
  }
  const Rational& last = dates_.back();
  if (!last.is_integer() || last.num() < 1) fail(ErrorCode::DateNotInGrid, "horizon must be a positive integer");
  horizon_ = static_cast<int>(last.num());
  year_index_.assign(static_cast<std::size_t>(horizon_) + 1, 0);
  std::vector<bool> seen_year(static_cast<std::size_t>(horizon_) + 1, false);
  std::vector<bool> interior(static_cast<std::size_t>(horizon_), false);
  for (std::size_t j = 0; j < dates_.size(); ++j) {
    if (dates_[j].is_integer()) {
      const auto y = static_cast<std::size_t>(dates_[j].num());
      seen_year[y] = true;
      year_index_[y] = j;
    } else {
      interior[static_cast<std::size_t>(dates_[j].floor())] = true;
    }
  }
  for (int y = 0; y <= horizon_; ++y) {
    if (!seen_year[static_cast<std::size_t>(y)]) {
      fail(ErrorCode::DateNotInGrid, "integer date " + std::to_string(y) + " missing from grid");
    }
  }
  for (int y = 0; y < horizon_; ++y) {
    if (!interior[static_cast<std::size_t>(y)]) {
      fail(ErrorCode::MissingInteriorDate,
           "no interior date in year (" + std::to_string(y) + ", " + std::to_string(y + 1) + ")");
    }
  }
}

DateGrid DateGrid::uniform(int horizon, int steps_per_year) {
  std::vector<Rational> dates;
  for (int y = 0; y < horizon; ++y) {
    for (int k = 0; k < steps_per_year; ++k) dates.emplace_back(y * steps_per_year + k, steps_per_year);
  }
  dates.emplace_back(horizon);
  return DateGrid(std::move(dates));
}

std::optional<std::size_t> DateGrid::find(const Rational& t) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), t);
  if (it == dates_.end() || *it != t) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

std::size_t DateGrid::index_of(const Rational& t) const {
  if (auto j = find(t)) return *j;
  fail(ErrorCode::DateNotInGrid, "date " + t.str() + " is not in the grid");
}

Rational successor_date(const DateGrid& grid, const Rational& t) {
  const std::size_t j = grid.index_of(t);
  if (j + 1 == grid.size()) return Rational(grid.horizon() + 1);
  return grid.date(j + 1);
}

std::span<const NodeId> ScenarioTree::children(NodeId n) const {
  const std::size_t b = child_begin_.at(n);
  const std::size_t e = child_begin_.at(n + 1);
  return std::span<const NodeId>(child_list_.data() + b, e - b);
}

std::optional<NodeId> ScenarioTree::find(const std::string& label) const {
  for (NodeId n = 0; n < label_.size(); ++n) {
    if (label_[n] == label) return n;
  }
  return std::nullopt;
}

ScenarioTree::NodeRange ScenarioTree::nodes_at(std::size_t j) const {
  return NodeRange(date_begin_.at(j), date_begin_.at(j + 1));
}

NodeId ScenarioTree::ancestor_at(NodeId n, std::size_t j) const {
  if (j > date_index(n)) fail(ErrorCode::DateNotInGrid, "ancestor requested at a later date");
  while (date_index_[n] > j) n = parent_[n];
  return n;
}

NodeId ScenarioTree::annual_ancestor(NodeId n) const {
  return ancestor_at(n, grid_.year_index(year_of(n)));
}

bool ScenarioTree::is_ancestor_or_self(NodeId a, NodeId n) const {
  if (date_index(a) > date_index(n)) return false;
  return ancestor_at(n, date_index(a)) == a;
}

ScenarioTree build_tree(DateGrid grid, std::vector<RawNode> nodes) {
  const std::size_t count = nodes.size();
  if (count == 0) fail(ErrorCode::OrphanNode, "tree has no nodes");

  std::map<std::string, std::size_t> by_label;
  for (std::size_t k = 0; k < count; ++k) {
    if (!by_label.emplace(nodes[k].label, k).second) {
      fail(ErrorCode::DuplicateNode, "duplicate node id '" + nodes[k].label + "'");
    }
    if (nodes[k].date_index >= grid.size()) {
      fail(ErrorCode::DateNotInGrid, "node '" + nodes[k].label + "' has a date index outside the grid");
    }
  }

  std::vector<std::size_t> raw_parent(count, kNoNode);
  std::vector<std::vector<std::size_t>> raw_children(count);
  std::size_t root = kNoNode;
  for (std::size_t k = 0; k < count; ++k) {
    const RawNode& rn = nodes[k];
    if (!rn.parent) {
      if (root != kNoNode) fail(ErrorCode::OrphanNode, "more than one root ('" + nodes[root].label + "', '" + rn.label + "')");
      root = k;
      continue;
    }
    auto it = by_label.find(*rn.parent);
    if (it == by_label.end()) {
      fail(ErrorCode::OrphanNode, "node '" + rn.label + "' references unknown parent '" + *rn.parent + "'");
    }
    raw_parent[k] = it->second;
    raw_children[it->second].push_back(k);
    if (rn.date_index != nodes[it->second].date_index + 1) {
      fail(ErrorCode::DateGap, "node '" + rn.label + "' is not at the date following its parent");
    }
    if (!(rn.probability > 0.0) || rn.probability > 1.0 || !std::isfinite(rn.probability)) {
      fail(ErrorCode::ProbabilityMass, "node '" + rn.label + "' has branch probability outside (0,1]");
    }
  }
  if (root == kNoNode) fail(ErrorCode::OrphanNode, "tree has no root");
  if (nodes[root].date_index != 0) fail(ErrorCode::OrphanNode, "root must sit at date 0");

  for (std::size_t k = 0; k < count; ++k) {
    if (raw_children[k].empty()) {
      if (nodes[k].date_index + 1 != grid.size()) {
        fail(ErrorCode::LeafNotAtHorizon, "leaf '" + nodes[k].label + "' is not at the horizon");
      }
      continue;
    }
    double mass = 0.0;
    for (std::size_t c : raw_children[k]) mass += nodes[c].probability;
    if (std::abs(mass - 1.0) > 1e-12) {
      fail(ErrorCode::ProbabilityMass,
           "children of '" + nodes[k].label + "' carry probability " + std::to_string(mass));
    }
  }

  // Breadth-first renumbering; children keep their input order.
  ScenarioTree tree;
  std::vector<std::size_t> order;
  order.reserve(count);
  std::deque<std::size_t> queue{root};
  while (!queue.empty()) {
    const std::size_t k = queue.front();
    queue.pop_front();
    order.push_back(k);
    for (std::size_t c : raw_children[k]) queue.push_back(c);
  }
  if (order.size() != count) fail(ErrorCode::OrphanNode, "tree contains nodes unreachable from the root");

  std::vector<NodeId> new_id(count);
  for (std::size_t pos = 0; pos < count; ++pos) new_id[order[pos]] = pos;

  tree.date_index_.resize(count);
  tree.parent_.resize(count);
  tree.probability_.resize(count);
  tree.path_probability_.resize(count);
  tree.label_.resize(count);
  tree.child_begin_.assign(count + 1, 0);
  for (std::size_t pos = 0; pos < count; ++pos) {
    const std::size_t k = order[pos];
    tree.date_index_[pos] = nodes[k].date_index;
    tree.parent_[pos] = raw_parent[k] == kNoNode ? kNoNode : new_id[raw_parent[k]];
    tree.probability_[pos] = raw_parent[k] == kNoNode ? 1.0 : nodes[k].probability;
    tree.path_probability_[pos] =
        raw_parent[k] == kNoNode ? 1.0 : tree.path_probability_[tree.parent_[pos]] * nodes[k].probability;
    tree.label_[pos] = nodes[k].label;
    tree.child_begin_[pos + 1] = tree.child_begin_[pos] + raw_children[k].size();
    for (std::size_t c : raw_children[k]) tree.child_list_.push_back(new_id[c]);
  }
  tree.date_begin_.assign(grid.size() + 1, count);
  for (std::size_t j = grid.size(); j-- > 0;) {
    tree.date_begin_[j] = tree.date_begin_[j + 1];
    for (NodeId n = 0; n < count; ++n) {
      if (tree.date_index_[n] == j) {
        tree.date_begin_[j] = n;
        break;
      }
    }
  }
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (tree.date_begin_[j] == tree.date_begin_[j + 1]) {
      fail(ErrorCode::DateGap, "no node at grid date " + grid.date(j).str());
    }
  }
  tree.grid_ = std::move(grid);
  return tree;
}

std::vector<Descendant> descendants_at(const ScenarioTree& tree, NodeId n, std::size_t j) {
  if (j < tree.date_index(n)) fail(ErrorCode::DateNotInGrid, "horizon precedes the node's date");
  std::vector<Descendant> frontier{{n, 1.0}};
  for (std::size_t d = tree.date_index(n); d < j; ++d) {
    std::vector<Descendant> next;
    for (const Descendant& x : frontier) {
      for (NodeId c : tree.children(x.node)) next.push_back({c, x.probability * tree.probability(c)});
    }
    frontier = std::move(next);
  }
  double total = 0.0;
  for (const Descendant& x : frontier) total += x.probability;
  for (Descendant& x : frontier) x.probability /= total;
  return frontier;
}

double AdaptedProcess::at(NodeId n) const {
  if (!defined(n)) fail(ErrorCode::ProcessUndefinedAtDate, "process undefined at node " + std::to_string(n));
  return values_[n];
}

DiscreteDistribution conditional_distribution(const ScenarioTree& tree, NodeId n,
                                              const AdaptedProcess& process, std::size_t horizon_index) {
  std::vector<Atom> atoms;
  for (const Descendant& d : descendants_at(tree, n, horizon_index)) atoms.push_back({process.at(d.node), d.probability});
  return DiscreteDistribution(std::move(atoms));
}

}  // namespace prodval
