#include "prodval/conditions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "prodval/error.hpp"

namespace prodval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSurplusSlack = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void validate(const FulfillmentSpec& spec) {
  std::visit(overloaded{[](const FullFulfillment&) {},
                        [](const RiskMeasureFulfillment& r) { validate(r.measure); },
                        [](const ProbabilityThreshold& t) {
                          if (!(t.p > 0.0 && t.p <= 1.0)) fail(ErrorCode::BadLevel, "probability threshold not in (0,1]");
                        }},
             spec);
}

void validate(const FinanciabilitySpec& spec) {
  if (const auto* c = std::get_if<CostOfCapital>(&spec); c && !(c->eta >= 0.0)) {
    fail(ErrorCode::BadRate, "cost-of-capital rate must be non-negative");
  }
}

bool fulfillment_satisfied(const FulfillmentSpec& spec, const DiscreteDistribution& surplus) {
  if (surplus.empty()) fail(ErrorCode::EmptyDistribution, "fulfillment tested on an empty distribution");
  return std::visit(overloaded{[&](const FullFulfillment&) { return surplus.min() >= -kSurplusSlack; },
                               [&](const RiskMeasureFulfillment& r) {
                                 return apply_measure(r.measure, surplus) <= kSurplusSlack;
                               },
                               [&](const ProbabilityThreshold& t) {
                                 return surplus.prob_at_least(-kSurplusSlack) >= t.p - 1e-12;
                               }},
                    spec);
}

RiskMeasureSpec fulfillment_measure(const FulfillmentSpec& spec) {
  return std::visit(overloaded{[](const FullFulfillment&) -> RiskMeasureSpec { return FullMeasure{}; },
                               [](const RiskMeasureFulfillment& r) -> RiskMeasureSpec { return r.measure; },
                               [](const ProbabilityThreshold& t) -> RiskMeasureSpec {
                                 if (t.p >= 1.0) return FullMeasure{};
                                 return ValueAtRisk{1.0 - t.p};
                               }},
                    spec);
}

YearOutcomes year_outcomes(const ScenarioTree& tree, NodeId annual_node, const std::vector<double>* edge_weights) {
  if (!tree.is_annual(annual_node)) fail(ErrorCode::DateNotInGrid, "year outcomes need an annual node");
  const int year = tree.year_of(annual_node);
  if (year >= tree.grid().horizon()) fail(ErrorCode::DateNotInGrid, "no period starts at the horizon");
  YearOutcomes out;
  out.start = annual_node;
  for (const Descendant& d : descendants_at(tree, annual_node, tree.grid().year_index(year + 1))) {
    out.nodes.push_back(d.node);
    out.probability.push_back(d.probability);
    if (edge_weights) {
      double q = 1.0;
      for (NodeId m = d.node; m != annual_node; m = tree.parent(m)) q *= (*edge_weights)[m];
      out.state_price.push_back(q);
    }
  }
  return out;
}

YearOutcomes year_outcomes(const ScenarioTree& tree, NodeId annual_node, const FinanciabilitySpec& spec) {
  if (const auto* s = std::get_if<StatePriceBound>(&spec)) {
    if (s->edge_weights.size() != tree.size()) fail(ErrorCode::MissingCertificate, "state-price weights do not cover the tree");
    return year_outcomes(tree, annual_node, &s->edge_weights);
  }
  return year_outcomes(tree, annual_node, nullptr);
}

double max_capital(const FinanciabilitySpec& spec, std::span<const double> payoff, std::span<const double> probability,
                   std::span<const double> state_price, double rate) {
  if (payoff.size() != probability.size()) fail(ErrorCode::DimensionMismatch, "payoff and probabilities differ in length");
  if (payoff.empty()) fail(ErrorCode::EmptyDistribution, "capital payoff has no outcomes");
  for (double v : payoff) {
    if (v < 0.0 || std::isnan(v)) fail(ErrorCode::NegativePayoffAtom, "capital payoff atom is negative");
  }
  return std::visit(overloaded{[&](const CostOfCapital& c) {
                                 if (!(1.0 + rate + c.eta > 0.0)) fail(ErrorCode::BadRate, "1 + r + eta must be positive");
                                 double e = 0.0;
                                 for (std::size_t k = 0; k < payoff.size(); ++k) {
                                   if (probability[k] > 0.0) e += probability[k] * payoff[k];
                                 }
                                 return e / (1.0 + rate + c.eta);
                               },
                               [&](const StatePriceBound&) {
                                 if (state_price.size() != payoff.size()) {
                                   fail(ErrorCode::MissingCertificate, "state prices missing for the capital payoff");
                                 }
                                 double v = 0.0;
                                 for (std::size_t k = 0; k < payoff.size(); ++k) {
                                   if (std::isnan(state_price[k])) {
                                     fail(ErrorCode::MissingCertificate, "node without a state-price certificate");
                                   }
                                   if (state_price[k] > 0.0) v += state_price[k] * payoff[k];
                                 }
                                 return v;
                               },
                               [&](const ZeroCapital&) { return 0.0; }},
                    spec);
}

double max_capital(const FinanciabilitySpec& spec, const DiscreteDistribution& payoff, double rate) {
  std::vector<double> v, p;
  for (const Atom& a : payoff.atoms()) {
    v.push_back(a.value);
    p.push_back(a.probability);
  }
  return max_capital(spec, v, p, {}, rate);
}

bool financiability_holds(const FinanciabilitySpec& spec, double capital, std::span<const double> payoff,
                          std::span<const double> probability, std::span<const double> state_price, double rate) {
  if (capital < 0.0) fail(ErrorCode::NegativePayoffAtom, "capital must be non-negative");
  return capital <= max_capital(spec, payoff, probability, state_price, rate) + 1e-9;
}

HomogeneityReport audit_positive_homogeneity(const FinanciabilitySpec& spec, std::span<const HomogeneitySample> samples,
                                             std::span<const double> factors, double tol) {
  HomogeneityReport report;
  for (const HomogeneitySample& s : samples) {
    const double base = max_capital(spec, s.payoff, s.probability, s.state_price, s.rate);
    for (double f : factors) {
      std::vector<double> scaled = s.payoff;
      for (double& v : scaled) v *= f;
      const double lhs = max_capital(spec, scaled, s.probability, s.state_price, s.rate);
      const double dev = std::abs(lhs - f * base) / std::max(1.0, std::abs(f * base));
      report.max_deviation = std::max(report.max_deviation, dev);
      ++report.checks;
    }
  }
  report.passed = report.max_deviation <= tol;
  return report;
}

namespace {

struct ReturnBounds {
  double max = 1.0;
  double min = 1.0;
  bool admissible = false;
};

// Best and worst expected gross return over the year of unit-price
// portfolios in R whose payoffs stay non-negative, rebalanced at interior
// dates (backward recursion over the year's nodes).
ReturnBounds year_return_bounds(const TradableSet& market, const ScenarioTree& tree, const RestrictionSet& restriction,
                                NodeId start) {
  const std::size_t end_index = tree.grid().year_index(tree.year_of(start) + 1);
  std::vector<NodeId> order{start};
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    for (NodeId c : tree.children(order[pos])) {
      if (tree.date_index(c) < end_index) order.push_back(c);
    }
  }
  const std::size_t m = restriction.dim();
  constexpr double kBox = 1e6;
  std::vector<double> vmax(tree.size(), 1.0), vmin(tree.size(), 1.0);
  bool start_admissible = false;
  for (std::size_t pos = order.size(); pos-- > 0;) {
    const NodeId t = order[pos];
    const auto kids = tree.children(t);
    const Vector s = restriction.restrict_functional(market.prices(t));
    Matrix a(2 + kids.size() + 2 * m, m);
    Vector b(2 + kids.size() + 2 * m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      a(0, k) = s[k];
      a(1, k) = -s[k];
    }
    b[0] = 1.0;
    b[1] = -1.0;
    Vector gmax(m, 0.0), gmin(m, 0.0);
    bool max_inf = false, min_inf = false;
    for (std::size_t c = 0; c < kids.size(); ++c) {
      const Vector p = restriction.restrict_functional(market.payoff(kids[c]));
      for (std::size_t k = 0; k < m; ++k) {
        a(2 + c, k) = -p[k];
        gmax[k] += tree.probability(kids[c]) * vmax[kids[c]] * p[k];
        gmin[k] -= tree.probability(kids[c]) * vmin[kids[c]] * p[k];
      }
      max_inf = max_inf || std::isinf(vmax[kids[c]]);
      min_inf = min_inf || std::isinf(vmin[kids[c]]);
    }
    for (std::size_t k = 0; k < m; ++k) {
      a(2 + kids.size() + 2 * k, k) = 1.0;
      b[2 + kids.size() + 2 * k] = kBox;
      a(2 + kids.size() + 2 * k + 1, k) = -1.0;
      b[2 + kids.size() + 2 * k + 1] = kBox;
    }
    const LpResult hi = max_inf ? LpResult{} : solve_lp_vertices(a, b, gmax);
    const LpResult lo = min_inf ? LpResult{} : solve_lp_vertices(a, b, gmin);
    const bool admissible = max_inf || min_inf || hi.feasible;
    if (t == start) start_admissible = admissible;
    if (!admissible) continue;  // no unit-price portfolio; keep neutral 1
    // An optimum on the box boundary is unbounded only if a wider box improves it.
    auto unbounded = [&](const LpResult& r, const Vector& c) {
      if (max_abs(r.x) <= 0.5 * kBox) return false;
      Vector wide = b;
      for (std::size_t k = 2 + kids.size(); k < wide.size(); ++k) wide[k] = 10.0 * kBox;
      const LpResult w = solve_lp_vertices(a, wide, c);
      return w.objective > r.objective + 1e-6 * std::max(1.0, std::abs(r.objective));
    };
    vmax[t] = (max_inf || unbounded(hi, gmax)) ? kInf : hi.objective;
    vmin[t] = (min_inf || unbounded(lo, gmin)) ? -kInf : -lo.objective;
  }
  return {vmax[start], vmin[start], start_admissible};
}

TradablesAudit run_tradables_audit(const FinanciabilitySpec& spec, const TradableSet& market, const ScenarioTree& tree,
                                   const RestrictionSet& restriction, const RateCurve& rates, bool neutrality) {
  TradablesAudit audit;
  const auto* coc = std::get_if<CostOfCapital>(&spec);
  for (int year = 0; year < tree.grid().horizon(); ++year) {
    for (NodeId n : tree.nodes_in_year(year)) {
      TradablesAuditNode row;
      row.node = n;
      const ReturnBounds bounds = year_return_bounds(market, tree, restriction, n);
      row.max_return = bounds.max;
      row.min_return = bounds.min;
      if (coc) {
        row.hurdle = 1.0 + rates.rate(n) + coc->eta;
        row.flagged = neutrality ? (bounds.admissible && bounds.min < row.hurdle - 1e-9)
                                 : (bounds.admissible && bounds.max > row.hurdle + 1e-9);
      } else if (std::holds_alternative<ZeroCapital>(spec)) {
        row.hurdle = kInf;
        row.flagged = neutrality && bounds.admissible;
      } else {
        row.hurdle = std::numeric_limits<double>::quiet_NaN();
      }
      audit.passed = audit.passed && !row.flagged;
      audit.nodes.push_back(row);
    }
  }
  std::ostringstream note;
  if (coc) {
    note << (neutrality ? "neutrality: expected returns of admissible self-financing portfolios must reach 1+r+eta"
                        : "consistency: expected returns of admissible self-financing portfolios must not exceed 1+r+eta");
    note << "; a condition passing both audits forces every such return to equal 1+r+eta";
  } else if (std::holds_alternative<ZeroCapital>(spec)) {
    note << (neutrality ? "zero capital admits no capital increase, so any admissible portfolio breaks neutrality"
                        : "zero capital is consistent at every node");
  } else {
    note << "state-price bound passes by construction";
  }
  audit.note = note.str();
  return audit;
}

}  // namespace

TradablesAudit audit_consistency_with_tradables(const FinanciabilitySpec& spec, const TradableSet& market,
                                                const ScenarioTree& tree, const RestrictionSet& restriction,
                                                const RateCurve& rates) {
  return run_tradables_audit(spec, market, tree, restriction, rates, false);
}

TradablesAudit audit_neutrality_to_tradables(const FinanciabilitySpec& spec, const TradableSet& market,
                                             const ScenarioTree& tree, const RestrictionSet& restriction,
                                             const RateCurve& rates) {
  return run_tradables_audit(spec, market, tree, restriction, rates, true);
}

}  // namespace prodval
