#pragma once

#include <string>
#include <vector>

#include "prodval/config.hpp"
#include "prodval/lattice.hpp"

namespace prodval::testing {

inline std::string data_path(const std::string& name) { return std::string(PRODVAL_DATA_DIR) + "/" + name; }

inline ValuationProblem two_point() { return load_config(data_path("two_point.json")); }

// root -> a, b at 1/2 (p = 0.5 each) -> a1, b1 at 1.
inline ScenarioTree five_node_tree() {
  DateGrid grid({Rational(0), Rational(1, 2), Rational(1)});
  return build_tree(grid, {{"root", 0, std::nullopt, 1.0},
                           {"a", 1, "root", 0.5},
                           {"b", 1, "root", 0.5},
                           {"a1", 2, "a", 1.0},
                           {"b1", 2, "b", 1.0}});
}

// Values indexed by node label.
inline AdaptedProcess labelled(const ScenarioTree& tree, const std::vector<std::pair<std::string, double>>& values) {
  AdaptedProcess p(tree.size());
  for (const auto& [label, v] : values) p.set(*tree.find(label), v);
  return p;
}

}  // namespace prodval::testing
