#include "prodval/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "prodval/error.hpp"
#include "prodval/resolution.hpp"
#include "prodval/solvency.hpp"

namespace prodval {

namespace {

using nlohmann::json;

json number_json(double x) {
  if (std::isfinite(x)) return std::stod(format_number(x));
  return format_number(x);
}

bool want_csv(OutputFormat f) { return f != OutputFormat::Json; }
bool want_json(OutputFormat f) { return f != OutputFormat::Csv; }

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

std::vector<NodeId> annual_nodes(const ScenarioTree& tree) {
  std::vector<NodeId> out;
  for (int year = 0; year <= tree.grid().horizon(); ++year) {
    for (NodeId n : tree.nodes_in_year(year)) out.push_back(n);
  }
  return out;
}

std::string family_label(const EngineConfig& config, std::size_t index) {
  return index < config.families.size() ? family_name(config.families[index]) : "";
}

void value_files(const ValuationProblem& problem, const ProductionCostProcess& pcp, OutputFormat format,
                 ReportBundle& bundle) {
  const ScenarioTree& tree = problem.model.tree;
  const int horizon = tree.grid().horizon();
  std::ostringstream csv;
  csv << "node,date,cost,capital,value,top_up,feasible,clamped,family,failed,failure_kind\n";
  json rows = json::array();
  for (NodeId n : annual_nodes(tree)) {
    const NodeValuation& v = pcp.nodes[n];
    const bool terminal = tree.year_of(n) == horizon;
    const BalanceSheetRow& b = pcp.balance[n];
    const std::string family = terminal || !v.feasible ? "" : family_label(problem.engine, v.family);
    csv << tree.label(n) << ',' << tree.date(n).str() << ',' << format_number(v.cost) << ','
        << format_number(v.capital) << ',' << format_number(v.value) << ',' << format_number(v.top_up) << ','
        << (v.feasible ? 1 : 0) << ',' << (v.clamped ? 1 : 0) << ',' << family << ',' << (b.failed ? 1 : 0) << ','
        << (tree.year_of(n) >= 1 ? to_string(b.kind) : "none") << '\n';
    json row = {{"node", tree.label(n)},        {"date", tree.date(n).str()},       {"cost", number_json(v.cost)},
                {"capital", number_json(v.capital)}, {"value", number_json(v.value)}, {"top_up", number_json(v.top_up)},
                {"feasible", v.feasible},       {"clamped", v.clamped},             {"family", family},
                {"failed", b.failed},           {"failure_kind", tree.year_of(n) >= 1 ? to_string(b.kind) : "none"}};
    if (!v.parameters.empty()) {
      json params = json::array();
      for (double w : v.parameters) params.push_back(number_json(w));
      row["parameters"] = params;
    }
    rows.push_back(std::move(row));
  }
  if (want_csv(format)) bundle.files.emplace_back("production_cost.csv", csv.str());
  if (want_json(format)) {
    json doc = {{"mode", to_string(problem.engine.mode)}, {"root_cost", number_json(pcp.nodes[tree.root()].cost)},
                {"nodes", rows}};
    bundle.files.emplace_back("production_cost.json", json_text(doc));
  }
}

json certificate_json(const ScenarioTree& tree, const ConsistencyCertificate& cert) {
  json nodes = json::array();
  for (const NodeCertificate& c : cert.nodes) {
    json j = {{"node", tree.label(c.node)}, {"consistent", c.consistent}, {"residual", number_json(c.residual)}};
    if (c.consistent) {
      json w = json::object();
      const auto kids = tree.children(c.node);
      for (std::size_t k = 0; k < kids.size() && k < c.weights.size(); ++k) w[tree.label(kids[k])] = number_json(c.weights[k]);
      j["weights"] = w;
    } else {
      json v = json::array();
      for (double x : c.violation) v.push_back(number_json(x));
      j["violation"] = v;
    }
    nodes.push_back(std::move(j));
  }
  return {{"consistent", cert.consistent()}, {"nodes", nodes}};
}

json audit_json(const ScenarioTree& tree, const TradablesAudit& audit) {
  json nodes = json::array();
  for (const TradablesAuditNode& a : audit.nodes) {
    nodes.push_back({{"node", tree.label(a.node)},
                     {"hurdle", number_json(a.hurdle)},
                     {"max_return", number_json(a.max_return)},
                     {"min_return", number_json(a.min_return)},
                     {"flagged", a.flagged}});
  }
  return {{"passed", audit.passed}, {"note", audit.note}, {"nodes", nodes}};
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", x);
  std::string s = buf;
  if (s == "-0.000000000") s = "0.000000000";
  return s;
}

std::string content_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ReportBundle run(const ValuationProblem& problem, const std::string& subcommand, OutputFormat format) {
  const ScenarioTree& tree = problem.model.tree;
  ReportBundle bundle;
  std::ostringstream summary;

  if (subcommand == "value" || subcommand == "adjust") {
    const ProductionCostProcess pcp = backward_value(problem.model, problem.flows, problem.engine, problem.conditions);
    value_files(problem, pcp, format, bundle);
    const double root = pcp.nodes[tree.root()].cost;
    summary << "v-bar(" << tree.label(tree.root()) << ") = " << format_number(root);
    bool finite = true;
    for (NodeId n : annual_nodes(tree)) finite = finite && std::isfinite(pcp.nodes[n].cost);
    if (!finite) {
      bundle.exit_code = 2;
      summary << " (infeasible nodes present)";
      if (subcommand == "adjust") summary << "; adjustment skipped";
      bundle.summary = summary.str();
      return bundle;
    }
    if (subcommand == "adjust") {
      const AdjustmentResult adj =
          extend_to_full_fulfillment(problem.model, problem.flows, pcp.strategy, pcp.capital, pcp.cost(),
                                     problem.conditions, problem.engine.mode, problem.theta_policy);
      std::ostringstream csv;
      csv << "node,date,xi,lambda,outflow,adjusted_outflow,inflow,adjusted_inflow,theta_payout,cost,adjusted_cost\n";
      json rows = json::array();
      for (NodeId n = 0; n < tree.size(); ++n) {
        const double theta = tree.is_annual(n) ? adj.theta.flows.outflow[n] : 0.0;
        csv << tree.label(n) << ',' << tree.date(n).str() << ',' << format_number(adj.xi[n]) << ','
            << format_number(adj.lambda[n]) << ',' << format_number(problem.flows.liability.outflow[n]) << ','
            << format_number(adj.flows.liability.outflow[n]) << ',' << format_number(problem.flows.liability.inflow[n])
            << ',' << format_number(adj.flows.liability.inflow[n]) << ',' << format_number(theta) << ','
            << (tree.is_annual(n) ? format_number(pcp.nodes[n].cost) : "") << ','
            << (tree.is_annual(n) ? format_number(adj.cost[n]) : "") << '\n';
        json row = {{"node", tree.label(n)},
                    {"date", tree.date(n).str()},
                    {"xi", number_json(adj.xi[n])},
                    {"lambda", number_json(adj.lambda[n])},
                    {"adjusted_outflow", number_json(adj.flows.liability.outflow[n])},
                    {"adjusted_inflow", number_json(adj.flows.liability.inflow[n])},
                    {"theta_payout", number_json(theta)}};
        if (tree.is_annual(n)) {
          row["cost"] = number_json(pcp.nodes[n].cost);
          row["adjusted_cost"] = number_json(adj.cost[n]);
        }
        rows.push_back(std::move(row));
      }
      if (want_csv(format)) bundle.files.emplace_back("adjustment.csv", csv.str());
      if (want_json(format)) {
        json doc = {{"validation_passed", adj.validation.passed},
                    {"first_failure", adj.validation.first_failure},
                    {"monotone", adj.monotone},
                    {"max_scaling_error", number_json(adj.max_scaling_error)},
                    {"passed", adj.passed},
                    {"nodes", rows}};
        bundle.files.emplace_back("adjustment.json", json_text(doc));
      }
      summary << "; adjusted strategy " << (adj.passed ? "validates" : "fails validation");
    }
  } else if (subcommand == "solvency") {
    const auto* coc = std::get_if<CostOfCapital>(&problem.conditions.financiability);
    if (!coc) fail(ErrorCode::SchemaViolation, "$.financiability: solvency needs a cost-of-capital condition");
    const RiskMeasureSpec rho = fulfillment_measure(problem.conditions.fulfillment);
    const SolvencyReport rep = multi_period_solvency(problem.model, problem.flows.liability, coc->eta, rho, problem.stage);
    std::ostringstream csv;
    csv << "node,date,BEL,RM,SCR,P_M1,stage\n";
    json rows = json::array();
    for (const SolvencyNode& s : rep.nodes) {
      csv << tree.label(s.node) << ',' << tree.date(s.node).str() << ',' << format_number(s.bel) << ','
          << format_number(s.rm) << ',' << format_number(s.scr) << ',' << format_number(s.prob_m1) << ',' << rep.stage
          << '\n';
      rows.push_back({{"node", tree.label(s.node)},
                      {"date", tree.date(s.node).str()},
                      {"BEL", number_json(s.bel)},
                      {"RM", number_json(s.rm)},
                      {"SCR", number_json(s.scr)},
                      {"P_M1", number_json(s.prob_m1)},
                      {"A_BEL", number_json(s.a_bel)},
                      {"A_RM", number_json(s.a_rm)},
                      {"A_SCR", number_json(s.a_scr)},
                      {"total", number_json(s.total)}});
    }
    if (want_csv(format)) bundle.files.emplace_back("solvency.csv", csv.str());
    if (want_json(format)) {
      json doc = {{"stage", rep.stage}, {"nodes", rows}, {"rm_cross_checked", rep.rm_cross_checked}};
      if (rep.rm_cross_checked) {
        doc["rm_formula"] = number_json(rep.rm_formula);
        doc["rm_error"] = number_json(rep.rm_error);
      }
      bundle.files.emplace_back("solvency.json", json_text(doc));
    }
    const SolvencyNode* root = rep.find(tree.root());
    summary << "stage " << rep.stage << ": BEL = " << format_number(root->bel) << ", RM = " << format_number(root->rm)
            << ", SCR = " << format_number(root->scr);
  } else if (subcommand == "check") {
    const ConsistencyCertificate cert = check_consistency(problem.model.market, tree, problem.model.restriction);
    json doc = {{"consistency", certificate_json(tree, cert)}};
    const FinanciabilitySpec& fin = problem.conditions.financiability;
    try {
      doc["consistent_with_tradables"] = audit_json(
          tree, audit_consistency_with_tradables(fin, problem.model.market, tree, problem.model.restriction, problem.model.rates));
      doc["neutral_to_tradables"] = audit_json(
          tree, audit_neutrality_to_tradables(fin, problem.model.market, tree, problem.model.restriction, problem.model.rates));
    } catch (const Error& e) {
      doc["audit_error"] = e.what();
    }
    bundle.files.emplace_back("check.json", json_text(doc));
    summary << "market " << (cert.consistent() ? "consistent" : "inconsistent");
  } else {
    fail(ErrorCode::SchemaViolation, "unknown subcommand '" + subcommand + "'");
  }
  bundle.summary = summary.str();
  return bundle;
}

}  // namespace prodval
