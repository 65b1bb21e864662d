#include "prodval/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "prodval/error.hpp"

namespace prodval {

namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& path, const std::string& what) {
  fail(ErrorCode::SchemaViolation, path + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema(path + "." + key, "missing field");
  return *it;
}

const json* optional_field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema(path, "expected an object");
  const auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) schema(path, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) schema(path, "expected an integer");
  return j.get<int>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) schema(path, "expected a string");
  return j.get<std::string>();
}

Rational date_value(const json& j, const std::string& path) {
  try {
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (j.is_number()) return Rational::from_double(j.get<double>());
  } catch (const Error& e) {
    schema(path, e.what());
  }
  schema(path, "expected a date as a number or a fraction string");
}

// {label: value} over tree nodes; missing nodes default to zero unless `required`.
std::vector<double> node_values(const json* j, const std::string& path, const ScenarioTree& tree, bool required) {
  std::vector<double> values(tree.size(), 0.0);
  std::vector<bool> seen(tree.size(), false);
  if (j) {
    if (!j->is_object()) schema(path, "expected an object keyed by node id");
    for (const auto& [label, v] : j->items()) {
      const auto n = tree.find(label);
      if (!n) fail(ErrorCode::CrossRefError, path + ": unknown node '" + label + "'");
      values[*n] = number(v, path + "." + label);
      seen[*n] = true;
    }
  }
  if (required) {
    for (NodeId n = 0; n < tree.size(); ++n) {
      if (!seen[n]) fail(ErrorCode::CrossRefError, path + ": missing value for node '" + tree.label(n) + "'");
    }
  }
  return values;
}

std::size_t tradable_ref(const json& j, const std::string& path, const TradableSet& market) {
  if (j.is_number_integer()) {
    const int k = j.get<int>();
    if (k < 0 || static_cast<std::size_t>(k) >= market.count()) fail(ErrorCode::CrossRefError, path + ": no tradable " + std::to_string(k));
    return static_cast<std::size_t>(k);
  }
  const std::string name = text(j, path);
  for (std::size_t k = 0; k < market.count(); ++k) {
    if (market.tradables()[k].name == name) return k;
  }
  fail(ErrorCode::CrossRefError, path + ": unknown tradable '" + name + "'");
}

std::string line_column(const std::string& src, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < src.size(); ++k) {
    if (src[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

SignClass sign_from(const std::string& s, const std::string& path) {
  if (s == "non_negative") return SignClass::NonNegative;
  if (s == "value_non_negative") return SignClass::ValueNonNegative;
  if (s == "unrestricted") return SignClass::Unrestricted;
  schema(path, "unknown sign class '" + s + "'");
}

const char* sign_name(SignClass s) {
  switch (s) {
    case SignClass::NonNegative: return "non_negative";
    case SignClass::ValueNonNegative: return "value_non_negative";
    case SignClass::Unrestricted: return "unrestricted";
  }
  return "non_negative";
}

StrategyFamily parse_family(const json& j, const std::string& path, const Model& model) {
  const std::string type = text(require(j, "type", path), path + ".type");
  if (type == "risk_free") return RiskFreeOnly{};
  if (type == "fixed_mix") {
    FixedMix mix;
    if (const json* t = optional_field(j, "tradables", path)) {
      if (!t->is_array()) schema(path + ".tradables", "expected an array");
      for (std::size_t k = 0; k < t->size(); ++k) {
        mix.tradables.push_back(tradable_ref((*t)[k], path + ".tradables[" + std::to_string(k) + "]", model.market));
      }
    }
    if (const json* g = optional_field(j, "grid_depth", path)) mix.grid_resolution = integer(*g, path + ".grid_depth");
    if (const json* r = optional_field(j, "refine_depth", path)) mix.refine_depth = integer(*r, path + ".refine_depth");
    if (mix.grid_resolution < 1) schema(path + ".grid_depth", "must be at least 1");
    if (mix.refine_depth < 0) schema(path + ".refine_depth", "must be non-negative");
    return mix;
  }
  if (type == "explicit") {
    SignClass sign = SignClass::NonNegative;
    if (const json* s = optional_field(j, "sign", path)) sign = sign_from(text(*s, path + ".sign"), path + ".sign");
    Strategy strategy(model.tree, model.market.count(), sign);
    const json& ports = require(j, "portfolios", path);
    if (!ports.is_object()) schema(path + ".portfolios", "expected an object keyed by node id");
    for (const auto& [label, v] : ports.items()) {
      const std::string p = path + ".portfolios." + label;
      const auto n = model.tree.find(label);
      if (!n) fail(ErrorCode::CrossRefError, path + ".portfolios: unknown node '" + label + "'");
      if (!v.is_array() || v.size() != model.market.count()) schema(p, "expected one unit count per tradable");
      Portfolio units;
      for (std::size_t k = 0; k < v.size(); ++k) units.push_back(number(v[k], p + "[" + std::to_string(k) + "]"));
      strategy.set_out(*n, std::move(units));
    }
    return ExplicitFamily{std::move(strategy)};
  }
  schema(path + ".type", "unknown family type '" + type + "'");
}

ValuationProblem parse_document(const json& doc) {
  if (!doc.is_object()) schema("$", "expected an object");
  ValuationProblem problem;

  // Grid and tree.
  const json& grid_j = require(doc, "grid", "$");
  const int horizon = integer(require(grid_j, "T", "$.grid"), "$.grid.T");
  DateGrid grid;
  if (const json* dates = optional_field(grid_j, "dates", "$.grid")) {
    if (!dates->is_array()) schema("$.grid.dates", "expected an array");
    std::vector<Rational> values;
    for (std::size_t k = 0; k < dates->size(); ++k) values.push_back(date_value((*dates)[k], "$.grid.dates[" + std::to_string(k) + "]"));
    grid = DateGrid(std::move(values));
  } else {
    const json& steps = require(grid_j, "steps_per_year", "$.grid");
    grid = DateGrid::uniform(horizon, integer(steps, "$.grid.steps_per_year"));
  }
  if (grid.horizon() != horizon) schema("$.grid.T", "does not match the last date");

  const json& nodes_j = require(require(doc, "tree", "$"), "nodes", "$.tree");
  if (!nodes_j.is_array()) schema("$.tree.nodes", "expected an array");
  std::vector<RawNode> raw;
  for (std::size_t k = 0; k < nodes_j.size(); ++k) {
    const std::string p = "$.tree.nodes[" + std::to_string(k) + "]";
    const json& nj = nodes_j[k];
    RawNode node;
    node.label = text(require(nj, "id", p), p + ".id");
    const Rational date = date_value(require(nj, "date", p), p + ".date");
    const auto idx = grid.find(date);
    if (!idx) fail(ErrorCode::DateNotInGrid, p + ".date: " + date.str() + " is not a grid date");
    node.date_index = *idx;
    if (const json* parent = optional_field(nj, "parent", p)) node.parent = text(*parent, p + ".parent");
    if (const json* prob = optional_field(nj, "p", p)) node.probability = number(*prob, p + ".p");
    raw.push_back(std::move(node));
  }
  problem.model.tree = build_tree(grid, std::move(raw));
  const ScenarioTree& tree = problem.model.tree;

  // Market.
  const json& market_j = require(doc, "market", "$");
  const json& trad_j = require(market_j, "tradables", "$.market");
  if (!trad_j.is_array() || trad_j.empty()) schema("$.market.tradables", "expected a non-empty array");
  bool close_out = false;
  if (const json* c = optional_field(market_j, "close_out", "$.market")) {
    if (!c->is_boolean()) schema("$.market.close_out", "expected a boolean");
    close_out = c->get<bool>();
  }
  std::vector<Tradable> tradables;
  for (std::size_t k = 0; k < trad_j.size(); ++k) {
    const std::string p = "$.market.tradables[" + std::to_string(k) + "]";
    Tradable t;
    t.name = "t" + std::to_string(k);
    if (const json* name = optional_field(trad_j[k], "name", p)) t.name = text(*name, p + ".name");
    if (const json* bp = optional_field(trad_j[k], "bond_period", p)) t.bond_period = integer(*bp, p + ".bond_period");
    tradables.push_back(std::move(t));
  }
  TradableSet market(tree.size(), std::move(tradables), close_out);
  for (std::size_t k = 0; k < trad_j.size(); ++k) {
    const std::string p = "$.market.tradables[" + std::to_string(k) + "]";
    const auto prices = node_values(&require(trad_j[k], "prices", p), p + ".prices", tree, true);
    const auto inflows = node_values(optional_field(trad_j[k], "inflows", p), p + ".inflows", tree, false);
    for (NodeId n = 0; n < tree.size(); ++n) {
      market.set_price(n, k, prices[n]);
      market.set_inflow(n, k, inflows[n]);
    }
  }
  market.validate(tree);
  problem.model.market = std::move(market);
  const TradableSet& mk = problem.model.market;

  // Restriction.
  problem.model.restriction = RestrictionSet::full(mk.count());
  if (const json* r = optional_field(doc, "restriction", "$")) {
    if (const json* idx = optional_field(*r, "indices", "$.restriction")) {
      if (!idx->is_array()) schema("$.restriction.indices", "expected an array");
      std::vector<std::size_t> indices;
      for (std::size_t k = 0; k < idx->size(); ++k) {
        indices.push_back(tradable_ref((*idx)[k], "$.restriction.indices[" + std::to_string(k) + "]", mk));
      }
      problem.model.restriction = RestrictionSet::coordinates(mk.count(), std::move(indices));
    } else if (const json* basis = optional_field(*r, "basis", "$.restriction")) {
      if (!basis->is_array() || basis->empty()) schema("$.restriction.basis", "expected a non-empty array of rows");
      Matrix b(basis->size(), mk.count());
      for (std::size_t i = 0; i < basis->size(); ++i) {
        const std::string p = "$.restriction.basis[" + std::to_string(i) + "]";
        if (!(*basis)[i].is_array() || (*basis)[i].size() != mk.count()) schema(p, "row length differs from tradable count");
        for (std::size_t k = 0; k < mk.count(); ++k) b(i, k) = number((*basis)[i][k], p);
      }
      problem.model.restriction = RestrictionSet::from_basis(std::move(b));
    } else {
      schema("$.restriction", "expected 'indices' or 'basis'");
    }
  }

  // Rates.
  if (const json* r = optional_field(doc, "rates", "$")) {
    if (const json* flat = optional_field(*r, "flat", "$.rates")) {
      problem.rate_source = "flat";
      problem.flat_rate = number(*flat, "$.rates.flat");
      problem.model.rates = RateCurve::flat(tree, problem.flat_rate);
    } else if (const json* annual = optional_field(*r, "annual", "$.rates")) {
      problem.rate_source = "annual";
      problem.annual_rates.assign(tree.size(), std::numeric_limits<double>::quiet_NaN());
      if (!annual->is_object()) schema("$.rates.annual", "expected an object keyed by node id");
      for (const auto& [label, v] : annual->items()) {
        const auto n = tree.find(label);
        if (!n) fail(ErrorCode::CrossRefError, "$.rates.annual: unknown node '" + label + "'");
        problem.annual_rates[*n] = number(v, "$.rates.annual." + label);
      }
      problem.model.rates = RateCurve::from_annual(tree, problem.annual_rates);
    } else {
      schema("$.rates", "expected 'flat' or 'annual'");
    }
  } else {
    problem.model.rates = RateCurve::from_bonds(tree, mk);
  }

  // Liability and illiquid inflows.
  const json& liab = require(doc, "liability", "$");
  problem.flows.liability.outflow = node_values(optional_field(liab, "outflows", "$.liability"), "$.liability.outflows", tree, false);
  problem.flows.liability.inflow = node_values(optional_field(liab, "inflows", "$.liability"), "$.liability.inflows", tree, false);
  problem.flows.liability.terminal = node_values(optional_field(liab, "terminal", "$.liability"), "$.liability.terminal", tree, false);
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (problem.flows.liability.terminal[n] != 0.0 && tree.date_index(n) + 1 != tree.grid().size()) {
      fail(ErrorCode::CrossRefError, "$.liability.terminal: node '" + tree.label(n) + "' is not at the horizon");
    }
  }
  problem.flows.illiquid.inflow.assign(tree.size(), 0.0);
  if (const json* ill = optional_field(doc, "illiquid", "$")) {
    problem.flows.illiquid.inflow = node_values(optional_field(*ill, "inflows", "$.illiquid"), "$.illiquid.inflows", tree, false);
  }
  problem.flows.validate(tree);

  // Conditions.
  const json& ful = require(doc, "fulfillment", "$");
  const std::string ftype = text(require(ful, "type", "$.fulfillment"), "$.fulfillment.type");
  if (ftype == "full") {
    problem.conditions.fulfillment = FullFulfillment{};
  } else if (ftype == "var") {
    problem.conditions.fulfillment = RiskMeasureFulfillment{ValueAtRisk{number(require(ful, "alpha", "$.fulfillment"), "$.fulfillment.alpha")}};
  } else if (ftype == "es") {
    problem.conditions.fulfillment = RiskMeasureFulfillment{ExpectedShortfall{number(require(ful, "alpha", "$.fulfillment"), "$.fulfillment.alpha")}};
  } else if (ftype == "probability") {
    problem.conditions.fulfillment = ProbabilityThreshold{number(require(ful, "p", "$.fulfillment"), "$.fulfillment.p")};
  } else {
    schema("$.fulfillment.type", "unknown type '" + ftype + "'");
  }
  try {
    validate(problem.conditions.fulfillment);
  } catch (const Error& e) {
    schema("$.fulfillment", e.what());
  }

  const json& fin = require(doc, "financiability", "$");
  const std::string fintype = text(require(fin, "type", "$.financiability"), "$.financiability.type");
  if (fintype == "coc") {
    problem.conditions.financiability = CostOfCapital{number(require(fin, "eta", "$.financiability"), "$.financiability.eta")};
  } else if (fintype == "state_price") {
    if (const json* w = optional_field(fin, "weights", "$.financiability")) {
      std::vector<double> weights = node_values(w, "$.financiability.weights", tree, false);
      weights[tree.root()] = std::numeric_limits<double>::quiet_NaN();
      problem.conditions.financiability = StatePriceBound{std::move(weights)};
    } else {
      problem.weights_from_certificate = true;
      const ConsistencyCertificate cert = check_consistency(mk, tree, problem.model.restriction);
      problem.conditions.financiability = StatePriceBound{cert.edge_weights(tree)};
    }
  } else if (fintype == "zero") {
    problem.conditions.financiability = ZeroCapital{};
  } else {
    schema("$.financiability.type", "unknown type '" + fintype + "'");
  }
  try {
    validate(problem.conditions.financiability);
  } catch (const Error& e) {
    schema("$.financiability", e.what());
  }

  // Engine.
  if (const json* eng = optional_field(doc, "engine", "$")) {
    if (const json* mode = optional_field(*eng, "mode", "$.engine")) {
      const std::string m = text(*mode, "$.engine.mode");
      if (m == "A") {
        problem.engine.mode = Mode::A;
      } else if (m == "B") {
        problem.engine.mode = Mode::B;
      } else {
        schema("$.engine.mode", "expected 'A' or 'B'");
      }
    }
    if (const json* fam = optional_field(*eng, "family", "$.engine")) {
      problem.engine.families.clear();
      if (fam->is_array()) {
        if (fam->empty()) schema("$.engine.family", "expected at least one family");
        for (std::size_t k = 0; k < fam->size(); ++k) {
          problem.engine.families.push_back(parse_family((*fam)[k], "$.engine.family[" + std::to_string(k) + "]", problem.model));
        }
      } else {
        problem.engine.families.push_back(parse_family(*fam, "$.engine.family", problem.model));
      }
    }
    if (const json* tol = optional_field(*eng, "tolerances", "$.engine")) {
      if (const json* b = optional_field(*tol, "bisection", "$.engine.tolerances")) {
        problem.engine.bisection_tol = number(*b, "$.engine.tolerances.bisection");
        if (!(problem.engine.bisection_tol > 0.0)) schema("$.engine.tolerances.bisection", "must be positive");
      }
    }
  }
  if (problem.engine.mode == Mode::A && !mk.close_out()) schema("$.engine.mode", "mode A requires market.close_out = true");

  if (const json* res = optional_field(doc, "resolution", "$")) {
    if (const json* pol = optional_field(*res, "theta_policy", "$.resolution")) {
      if (pol->is_string() && pol->get<std::string>() == "risk_free") {
        problem.theta_policy = {};
      } else if (pol->is_object()) {
        problem.theta_policy.kind = ReinvestPolicy::Kind::Tradable;
        problem.theta_policy.tradable = tradable_ref(require(*pol, "tradable", "$.resolution.theta_policy"),
                                                     "$.resolution.theta_policy.tradable", mk);
      } else {
        schema("$.resolution.theta_policy", "expected 'risk_free' or {\"tradable\": ...}");
      }
    }
  }
  if (const json* sol = optional_field(doc, "solvency", "$")) {
    if (const json* st = optional_field(*sol, "stage", "$.solvency")) {
      problem.stage = integer(*st, "$.solvency.stage");
      if (problem.stage < 1 || problem.stage > 3) schema("$.solvency.stage", "must be 1, 2 or 3");
    }
  }
  return problem;
}

json node_map(const ScenarioTree& tree, const std::vector<double>& values, bool keep_zero) {
  json out = json::object();
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (keep_zero || values[n] != 0.0) out[tree.label(n)] = values[n];
  }
  return out;
}

}  // namespace

ValuationProblem parse_config(const std::string& src) {
  json doc;
  try {
    doc = json::parse(src);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, line_column(src, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  return parse_document(doc);
}

ValuationProblem load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string save_config(const ValuationProblem& problem) {
  const ScenarioTree& tree = problem.model.tree;
  const TradableSet& mk = problem.model.market;
  json doc;

  json dates = json::array();
  for (const Rational& d : tree.grid().dates()) dates.push_back(d.str());
  doc["grid"] = {{"T", tree.grid().horizon()}, {"dates", dates}};

  json nodes = json::array();
  for (NodeId n = 0; n < tree.size(); ++n) {
    json node = {{"id", tree.label(n)}, {"date", tree.date(n).str()}};
    node["parent"] = n == tree.root() ? json(nullptr) : json(tree.label(tree.parent(n)));
    node["p"] = tree.probability(n);
    nodes.push_back(std::move(node));
  }
  doc["tree"] = {{"nodes", nodes}};

  json tradables = json::array();
  for (std::size_t k = 0; k < mk.count(); ++k) {
    std::vector<double> prices(tree.size()), inflows(tree.size());
    for (NodeId n = 0; n < tree.size(); ++n) {
      prices[n] = mk.prices(n)[k];
      inflows[n] = mk.inflows(n)[k];
    }
    json t = {{"name", mk.tradables()[k].name}, {"prices", node_map(tree, prices, true)}, {"inflows", node_map(tree, inflows, false)}};
    if (mk.tradables()[k].bond_period) t["bond_period"] = *mk.tradables()[k].bond_period;
    tradables.push_back(std::move(t));
  }
  doc["market"] = {{"tradables", tradables}, {"close_out", mk.close_out()}};

  const RestrictionSet& r = problem.model.restriction;
  if (r.is_coordinate()) {
    doc["restriction"] = {{"indices", r.indices()}};
  } else {
    json rows = json::array();
    for (std::size_t i = 0; i < r.dim(); ++i) {
      json row = json::array();
      for (std::size_t k = 0; k < r.ambient_dim(); ++k) row.push_back(r.basis()(i, k));
      rows.push_back(std::move(row));
    }
    doc["restriction"] = {{"basis", rows}};
  }

  if (problem.rate_source == "flat") {
    doc["rates"] = {{"flat", problem.flat_rate}};
  } else if (problem.rate_source == "annual") {
    json annual = json::object();
    for (NodeId n = 0; n < tree.size(); ++n) {
      if (!std::isnan(problem.annual_rates[n])) annual[tree.label(n)] = problem.annual_rates[n];
    }
    doc["rates"] = {{"annual", annual}};
  }

  const ProductionFlows& f = problem.flows;
  doc["liability"] = {{"outflows", node_map(tree, f.liability.outflow, false)},
                      {"inflows", node_map(tree, f.liability.inflow, false)},
                      {"terminal", node_map(tree, f.liability.terminal, false)}};
  doc["illiquid"] = {{"inflows", node_map(tree, f.illiquid.inflow, false)}};

  const FulfillmentSpec& ful = problem.conditions.fulfillment;
  if (std::holds_alternative<FullFulfillment>(ful)) {
    doc["fulfillment"] = {{"type", "full"}};
  } else if (const auto* t = std::get_if<ProbabilityThreshold>(&ful)) {
    doc["fulfillment"] = {{"type", "probability"}, {"p", t->p}};
  } else {
    const RiskMeasureSpec& m = std::get<RiskMeasureFulfillment>(ful).measure;
    if (const auto* v = std::get_if<ValueAtRisk>(&m)) {
      doc["fulfillment"] = {{"type", "var"}, {"alpha", v->alpha}};
    } else if (const auto* e = std::get_if<ExpectedShortfall>(&m)) {
      doc["fulfillment"] = {{"type", "es"}, {"alpha", e->alpha}};
    } else {
      doc["fulfillment"] = {{"type", "full"}};
    }
  }

  const FinanciabilitySpec& fin = problem.conditions.financiability;
  if (const auto* c = std::get_if<CostOfCapital>(&fin)) {
    doc["financiability"] = {{"type", "coc"}, {"eta", c->eta}};
  } else if (const auto* s = std::get_if<StatePriceBound>(&fin)) {
    doc["financiability"] = {{"type", "state_price"}};
    if (!problem.weights_from_certificate) {
      json w = json::object();
      for (NodeId n = 0; n < tree.size(); ++n) {
        if (n != tree.root() && !std::isnan(s->edge_weights[n])) w[tree.label(n)] = s->edge_weights[n];
      }
      doc["financiability"]["weights"] = w;
    }
  } else {
    doc["financiability"] = {{"type", "zero"}};
  }

  json families = json::array();
  for (const StrategyFamily& fam : problem.engine.families) {
    if (std::holds_alternative<RiskFreeOnly>(fam)) {
      families.push_back({{"type", "risk_free"}});
    } else if (const auto* mix = std::get_if<FixedMix>(&fam)) {
      families.push_back({{"type", "fixed_mix"}, {"tradables", mix->tradables}, {"grid_depth", mix->grid_resolution},
                          {"refine_depth", mix->refine_depth}});
    } else {
      const Strategy& s = std::get<ExplicitFamily>(fam).strategy;
      json ports = json::object();
      for (NodeId n = 0; n < tree.size(); ++n) {
        const Portfolio& p = s.out(n);
        if (std::any_of(p.begin(), p.end(), [](double u) { return u != 0.0; })) ports[tree.label(n)] = p;
      }
      families.push_back({{"type", "explicit"}, {"sign", sign_name(s.sign_class())}, {"portfolios", ports}});
    }
  }
  doc["engine"] = {{"mode", to_string(problem.engine.mode)},
                   {"family", families},
                   {"tolerances", {{"bisection", problem.engine.bisection_tol}}}};
  if (problem.theta_policy.kind == ReinvestPolicy::Kind::RiskFree) {
    doc["resolution"] = {{"theta_policy", "risk_free"}};
  } else {
    doc["resolution"] = {{"theta_policy", {{"tradable", problem.theta_policy.tradable}}}};
  }
  doc["solvency"] = {{"stage", problem.stage}};
  return doc.dump(2) + "\n";
}

}  // namespace prodval
