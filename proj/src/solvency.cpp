#include "prodval/solvency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prodval/error.hpp"

namespace prodval {

namespace {

void check_inputs(double rate, double eta) {
  if (!(1.0 + rate > 0.0) || !std::isfinite(rate)) fail(ErrorCode::BadRate, "1 + r must be positive");
  if (!(eta >= 0.0) || !std::isfinite(eta)) fail(ErrorCode::BadRate, "cost-of-capital rate must be non-negative");
}

double expectation(const std::vector<double>& p, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += p[k] * x[k];
  return s;
}

std::vector<double> liability_values(const PeriodOutcomes& o) {
  const std::size_t n = o.probability.size();
  if (o.outflow.size() != n || o.bel.size() != n || o.rm.size() != n) {
    fail(ErrorCode::DimensionMismatch, "period outcomes have inconsistent lengths");
  }
  if (n == 0) fail(ErrorCode::EmptyDistribution, "no period-end outcomes");
  std::vector<double> l(n);
  for (std::size_t k = 0; k < n; ++k) l[k] = o.outflow[k] + o.bel[k] + o.rm[k];
  return l;
}

bool in_m1(double surplus, double rho_value) {
  return surplus >= -rho_value - 1e-12 * std::max(1.0, std::abs(rho_value));
}

// Shared tail of stages 2 and 3 once M_1 and rho_b are known.
StageDecomposition finish(double bel, double rho_b, double prob_m1, double rm_on_m1, double rate, double eta) {
  StageDecomposition d;
  d.bel = bel;
  d.prob_m1 = prob_m1;
  d.scr = (prob_m1 * rho_b - rm_on_m1) / (1.0 + rate + eta);
  d.rm = rho_b / (1.0 + rate) - d.scr;
  return d;
}

}  // namespace

Stage1Result stage1_value(const DiscreteDistribution& liability, double rate, double eta, const RiskMeasureSpec& rho) {
  check_inputs(rate, eta);
  validate(rho);
  Stage1Result r;
  const double q = apply_measure(rho, liability.negated());
  r.assets = q / (1.0 + rate);
  double shortfall = 0.0;
  double mass = 0.0;
  for (const Atom& a : liability.atoms()) {
    if (a.value <= q + 1e-12 * std::max(1.0, std::abs(q))) {
      mass += a.probability;
      shortfall += a.probability * std::max(0.0, q - a.value);
    }
  }
  r.prob_m1 = std::min(1.0, mass);
  r.scr = shortfall / (1.0 + rate + eta);
  r.value = r.assets - r.scr;
  return r;
}

double stage1_closed_form(const DiscreteDistribution& liability, double rate, double eta, const RiskMeasureSpec& rho) {
  const Stage1Result s = stage1_value(liability, rate, eta, rho);
  if (s.prob_m1 < 1.0 - 1e-12) fail(ErrorCode::MassOutsideM1, "liability exceeds rho(-L) with positive probability");
  const double mean = liability.mean();
  const DiscreteDistribution deviation = liability.negated().shifted(mean).scaled(1.0 / (1.0 + rate));
  return mean / (1.0 + rate) + eta / (1.0 + rate + eta) * apply_measure(rho, deviation);
}

StageDecomposition stage2_decompose(const PeriodOutcomes& outcomes, double rate, double eta, const RiskMeasureSpec& rho,
                                    const std::vector<double>* bel_gross_return) {
  check_inputs(rate, eta);
  validate(rho);
  const std::vector<double> l = liability_values(outcomes);
  const std::vector<double>& p = outcomes.probability;
  const std::size_t n = l.size();
  std::vector<double> gross(n, 1.0 + rate);
  if (bel_gross_return) {
    if (bel_gross_return->size() != n) fail(ErrorCode::DimensionMismatch, "BEL return shape has the wrong length");
    gross = *bel_gross_return;
  }

  // For a given BEL_0: M_1, rho_b and the separation update.
  struct Pass {
    double rho_b, prob, g_on_m, flow_on_m, rm_on_m;
  };
  auto evaluate = [&](double bel0) {
    std::vector<double> surplus(n);
    for (std::size_t k = 0; k < n; ++k) surplus[k] = bel0 * gross[k] - l[k];
    Pass s{apply_measure(rho, DiscreteDistribution(surplus, p)), 0.0, 0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
      if (!in_m1(surplus[k], s.rho_b)) continue;
      s.prob += p[k];
      s.g_on_m += p[k] * gross[k];
      s.flow_on_m += p[k] * (outcomes.outflow[k] + outcomes.bel[k]);
      s.rm_on_m += p[k] * outcomes.rm[k];
    }
    return s;
  };

  // Risk-free: M_1 = {L <= rho(-L)} does not depend on BEL_0.
  const Pass base = evaluate(0.0);
  if (!(base.g_on_m > 0.0)) fail(ErrorCode::NumericalFailure, "best-estimate strategy has no value on M_1");
  double bel = base.flow_on_m / base.g_on_m;
  if (bel_gross_return) {
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
      const Pass s = evaluate(bel);
      if (!(s.g_on_m > 0.0)) fail(ErrorCode::FixedPointDivergence, "best-estimate strategy has no value on M_1");
      const double next = 0.5 * bel + 0.5 * s.flow_on_m / s.g_on_m;
      const bool done = std::abs(next - bel) <= 1e-10 * std::max(1.0, std::abs(bel));
      bel = next;
      if (done) {
        converged = true;
        break;
      }
    }
    if (!converged) fail(ErrorCode::FixedPointDivergence, "best-estimate fixed point did not converge");
  }
  const Pass s = evaluate(bel);
  return finish(bel, s.rho_b, std::min(1.0, s.prob), s.rm_on_m, rate, eta);
}

StageDecomposition stage3_decompose(const PeriodOutcomes& outcomes, double rate, double eta, const RiskMeasureSpec& rho) {
  check_inputs(rate, eta);
  validate(rho);
  const std::vector<double> l = liability_values(outcomes);
  const std::vector<double>& p = outcomes.probability;
  StageDecomposition d;
  d.bel = (expectation(p, outcomes.outflow) + expectation(p, outcomes.bel)) / (1.0 + rate);
  std::vector<double> surplus(l.size());
  for (std::size_t k = 0; k < l.size(); ++k) surplus[k] = (1.0 + rate) * d.bel - l[k];
  const double rho_b = apply_measure(rho, DiscreteDistribution(surplus, p));
  d.rm = eta * rho_b / ((1.0 + rate + eta) * (1.0 + rate)) + expectation(p, outcomes.rm) / (1.0 + rate + eta);
  d.scr = rho_b / (1.0 + rate) - d.rm;
  d.prob_m1 = 0.0;
  for (std::size_t k = 0; k < l.size(); ++k) {
    if (in_m1(surplus[k], rho_b)) d.prob_m1 += p[k];
  }
  d.prob_m1 = std::min(1.0, d.prob_m1);
  return d;
}

const SolvencyNode* SolvencyReport::find(NodeId n) const {
  const auto it = std::find_if(nodes.begin(), nodes.end(), [n](const SolvencyNode& s) { return s.node == n; });
  return it == nodes.end() ? nullptr : &*it;
}

SolvencyReport multi_period_solvency(const Model& model, const LiabilitySpec& liability, double eta,
                                     const RiskMeasureSpec& rho, int stage) {
  const ScenarioTree& tree = model.tree;
  if (stage < 1 || stage > 3) fail(ErrorCode::SchemaViolation, "stage must be 1, 2 or 3");
  if (liability.outflow.size() != tree.size() || liability.inflow.size() != tree.size() ||
      liability.terminal.size() != tree.size()) {
    fail(ErrorCode::DimensionMismatch, "liability does not cover the tree");
  }
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (!tree.is_annual(n) && (liability.outflow[n] != 0.0 || liability.inflow[n] != 0.0)) {
      fail(ErrorCode::InteriorFlowsPresent, "liability has cash flows at interior node '" + tree.label(n) + "'");
    }
  }

  const int horizon = tree.grid().horizon();
  std::vector<SolvencyNode> by_node(tree.size());
  for (NodeId n : tree.nodes_in_year(horizon)) {
    by_node[n].node = n;
    by_node[n].bel = liability.terminal[n];
    by_node[n].total = liability.terminal[n];
  }
  for (int year = horizon - 1; year >= 0; --year) {
    for (NodeId n : tree.nodes_in_year(year)) {
      const YearOutcomes out = year_outcomes(tree, n);
      const double r = model.rates.rate(n);
      PeriodOutcomes po;
      po.probability = out.probability;
      for (NodeId m : out.nodes) {
        po.outflow.push_back(liability.outflow[m] - liability.inflow[m]);
        po.bel.push_back(by_node[m].bel);
        po.rm.push_back(by_node[m].rm);
      }
      SolvencyNode& s = by_node[n];
      s.node = n;
      if (stage == 1) {
        std::vector<double> l(po.probability.size());
        for (std::size_t k = 0; k < l.size(); ++k) l[k] = po.outflow[k] + po.bel[k] + po.rm[k];
        const Stage1Result r1 = stage1_value(DiscreteDistribution(l, po.probability), r, eta, rho);
        s.bel = (expectation(po.probability, po.outflow) + expectation(po.probability, po.bel)) / (1.0 + r);
        s.rm = r1.value - s.bel;
        s.scr = r1.scr;
        s.prob_m1 = r1.prob_m1;
      } else {
        const StageDecomposition d =
            stage == 2 ? stage2_decompose(po, r, eta, rho) : stage3_decompose(po, r, eta, rho);
        s.bel = d.bel;
        s.rm = d.rm;
        s.scr = d.scr;
        s.prob_m1 = d.prob_m1;
      }
      s.total = s.bel + s.rm;
      s.a_bel = (1.0 + r) * s.bel;
      s.a_rm = (1.0 + r) * s.rm;
      s.a_scr = (1.0 + r) * s.scr;
    }
  }

  SolvencyReport report;
  report.stage = stage;
  for (int year = 0; year <= horizon; ++year) {
    for (NodeId n : tree.nodes_in_year(year)) report.nodes.push_back(by_node[n]);
  }

  if (stage == 3) {
    // Deterministic SCR per date and a flat rate: compare with the summation formula.
    bool applicable = true;
    const double r0 = model.rates.rate(tree.root());
    std::vector<double> scr_by_year;
    for (int year = 0; year < horizon && applicable; ++year) {
      const auto range = tree.nodes_in_year(year);
      const double first = by_node[*range.begin()].scr;
      for (NodeId n : range) {
        if (std::abs(by_node[n].scr - first) > 1e-12 * std::max(1.0, std::abs(first)) ||
            std::abs(model.rates.rate(n) - r0) > 1e-15) {
          applicable = false;
        }
      }
      scr_by_year.push_back(first);
    }
    if (applicable) {
      double sum = 0.0;
      for (std::size_t i = 0; i < scr_by_year.size(); ++i) {
        sum += scr_by_year[i] / std::pow(1.0 + r0, static_cast<double>(i + 1));
      }
      report.rm_cross_checked = true;
      report.rm_formula = eta * sum;
      report.rm_error = std::abs(report.rm_formula - by_node[tree.root()].rm);
    }
  }
  return report;
}

}  // namespace prodval
