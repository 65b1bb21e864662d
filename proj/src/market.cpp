#include "prodval/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prodval/error.hpp"

namespace prodval {

TradableSet::TradableSet(std::size_t node_count, std::vector<Tradable> tradables, bool close_out)
    : node_count_(node_count),
      tradables_(std::move(tradables)),
      prices_(node_count * tradables_.size(), 0.0),
      inflows_(node_count * tradables_.size(), 0.0),
      close_out_(close_out) {}

Vector TradableSet::payoff(NodeId n) const {
  Vector out(count());
  for (std::size_t k = 0; k < count(); ++k) out[k] = prices(n)[k] + inflows(n)[k];
  return out;
}

std::optional<std::size_t> TradableSet::bond_for_year(int year) const {
  for (std::size_t k = 0; k < tradables_.size(); ++k) {
    if (tradables_[k].bond_period == year) return k;
  }
  return std::nullopt;
}

void TradableSet::validate(const ScenarioTree& tree) const {
  if (tradables_.empty()) fail(ErrorCode::InvalidTradable, "market has no tradables");
  if (node_count_ != tree.size()) fail(ErrorCode::DimensionMismatch, "market does not cover the tree");
  for (NodeId n = 0; n < node_count_; ++n) {
    bool nonzero = false;
    for (std::size_t k = 0; k < count(); ++k) {
      const double s = prices(n)[k];
      const double z = inflows(n)[k];
      if (!std::isfinite(s) || s < 0.0) {
        fail(ErrorCode::InvalidTradable, "negative price of '" + tradables_[k].name + "' at node '" + tree.label(n) + "'");
      }
      if (!std::isfinite(z) || z < 0.0) {
        fail(ErrorCode::InvalidTradable, "negative inflow of '" + tradables_[k].name + "' at node '" + tree.label(n) + "'");
      }
      nonzero = nonzero || s > 0.0;
    }
    if (!nonzero) fail(ErrorCode::InvalidTradable, "all prices vanish at node '" + tree.label(n) + "'");
  }
  for (std::size_t k = 0; k < count(); ++k) {
    if (!tradables_[k].bond_period) continue;
    const int i = *tradables_[k].bond_period;
    if (i < 0 || i >= tree.grid().horizon()) {
      fail(ErrorCode::InvalidTradable, "bond '" + tradables_[k].name + "' has a period outside the horizon");
    }
    for (NodeId n : tree.nodes_in_year(i)) {
      if (!(prices(n)[k] > 0.0)) {
        fail(ErrorCode::InvalidTradable, "bond '" + tradables_[k].name + "' needs a positive price at '" + tree.label(n) + "'");
      }
    }
    for (NodeId n : tree.nodes_in_year(i + 1)) {
      if (std::abs(prices(n)[k]) > 1e-12 || std::abs(inflows(n)[k] - 1.0) > 1e-12) {
        fail(ErrorCode::InvalidTradable,
             "bond '" + tradables_[k].name + "' must pay 1 and be worth 0 at maturity node '" + tree.label(n) + "'");
      }
    }
  }
}

double portfolio_price(const TradableSet& market, NodeId n, std::span<const double> portfolio) {
  if (portfolio.size() != market.count()) fail(ErrorCode::DimensionMismatch, "portfolio length differs from tradable count");
  return dot(portfolio, market.prices(n));
}

double portfolio_inflow(const TradableSet& market, NodeId n, std::span<const double> portfolio) {
  if (portfolio.size() != market.count()) fail(ErrorCode::DimensionMismatch, "portfolio length differs from tradable count");
  return dot(portfolio, market.inflows(n));
}

RestrictionSet RestrictionSet::full(std::size_t ambient) {
  std::vector<std::size_t> idx(ambient);
  for (std::size_t k = 0; k < ambient; ++k) idx[k] = k;
  return coordinates(ambient, std::move(idx));
}

RestrictionSet RestrictionSet::coordinates(std::size_t ambient, std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
    fail(ErrorCode::DimensionMismatch, "restriction indices repeat");
  }
  RestrictionSet r;
  r.basis_ = Matrix(indices.size(), ambient);
  for (std::size_t row = 0; row < indices.size(); ++row) {
    if (indices[row] >= ambient) fail(ErrorCode::DimensionMismatch, "restriction index out of range");
    r.basis_(row, indices[row]) = 1.0;
  }
  r.indices_ = std::move(indices);
  r.coordinate_ = true;
  return r;
}

RestrictionSet RestrictionSet::from_basis(Matrix basis) {
  // Rows must be independent.
  Matrix t(basis.cols(), basis.rows());
  for (std::size_t r = 0; r < basis.rows(); ++r) {
    for (std::size_t c = 0; c < basis.cols(); ++c) t(c, r) = basis(r, c);
  }
  Vector zero(basis.cols(), 0.0);
  if (basis.rows() > 0 && !least_squares(t, zero, 1e-10)) {
    fail(ErrorCode::DimensionMismatch, "restriction basis vectors are linearly dependent");
  }
  RestrictionSet r;
  r.basis_ = std::move(basis);
  r.coordinate_ = false;
  return r;
}

bool RestrictionSet::contains(std::span<const double> portfolio, double tol) const {
  if (portfolio.size() != ambient_dim()) fail(ErrorCode::DimensionMismatch, "portfolio length differs from restriction");
  const double scale = std::max(1.0, max_abs(portfolio));
  if (coordinate_) {
    std::vector<bool> allowed(ambient_dim(), false);
    for (std::size_t k : indices_) allowed[k] = true;
    for (std::size_t k = 0; k < portfolio.size(); ++k) {
      if (!allowed[k] && std::abs(portfolio[k]) > tol * scale) return false;
    }
    return true;
  }
  if (dim() == 0) return max_abs(portfolio) <= tol;
  Matrix t(ambient_dim(), dim());
  for (std::size_t r = 0; r < dim(); ++r) {
    for (std::size_t c = 0; c < ambient_dim(); ++c) t(c, r) = basis_(r, c);
  }
  auto y = least_squares(t, portfolio);
  if (!y) return false;
  const Portfolio back = embed(*y);
  for (std::size_t k = 0; k < back.size(); ++k) {
    if (std::abs(back[k] - portfolio[k]) > tol * scale) return false;
  }
  return true;
}

bool ConsistencyCertificate::consistent() const {
  return std::all_of(nodes.begin(), nodes.end(), [](const NodeCertificate& c) { return c.consistent; });
}

const NodeCertificate* ConsistencyCertificate::find(NodeId n) const {
  for (const NodeCertificate& c : nodes) {
    if (c.node == n) return &c;
  }
  return nullptr;
}

std::vector<double> ConsistencyCertificate::edge_weights(const ScenarioTree& tree) const {
  std::vector<double> w(tree.size(), std::numeric_limits<double>::quiet_NaN());
  for (const NodeCertificate& c : nodes) {
    if (!c.consistent) continue;
    const auto kids = tree.children(c.node);
    for (std::size_t k = 0; k < kids.size(); ++k) w[kids[k]] = c.weights[k];
  }
  return w;
}

namespace {

bool next_subset(std::vector<std::size_t>& idx, std::size_t m) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < m - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

double reconstruction_error(const Matrix& payoffs, std::span<const double> weights, std::span<const double> target) {
  const Vector fit = payoffs.multiply(weights);
  double err = 0.0;
  for (std::size_t k = 0; k < fit.size(); ++k) err = std::max(err, std::abs(fit[k] - target[k]));
  return err / std::max(1.0, max_abs(target));
}

}  // namespace

NodeCertificate check_node_consistency(const TradableSet& market, const ScenarioTree& tree,
                                       const RestrictionSet& restriction, NodeId n) {
  const auto kids = tree.children(n);
  const std::size_t m = restriction.dim();
  const std::size_t nc = kids.size();
  NodeCertificate cert;
  cert.node = n;

  const Vector s = restriction.restrict_functional(market.prices(n));
  Matrix payoffs(m, nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const Vector p = restriction.restrict_functional(market.payoff(kids[c]));
    for (std::size_t r = 0; r < m; ++r) payoffs(r, c) = p[r];
  }

  // Centroid of the basic feasible solutions of payoffs * lambda = s, lambda >= 0.
  std::vector<Vector> solutions;
  if (max_abs(s) == 0.0) solutions.emplace_back(nc, 0.0);
  for (std::size_t size = 1; size <= std::min(m, nc) && max_abs(s) > 0.0; ++size) {
    std::vector<std::size_t> idx(size);
    for (std::size_t k = 0; k < size; ++k) idx[k] = k;
    do {
      Matrix sub(m, size);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t k = 0; k < size; ++k) sub(r, k) = payoffs(r, idx[k]);
      }
      auto lam = least_squares(sub, s, 1e-10);
      if (!lam) continue;
      Vector full(nc, 0.0);
      bool nonneg = true;
      for (std::size_t k = 0; k < size; ++k) {
        if ((*lam)[k] < -1e-12 * std::max(1.0, max_abs(*lam))) nonneg = false;
        full[idx[k]] = std::max(0.0, (*lam)[k]);
      }
      if (!nonneg || reconstruction_error(payoffs, full, s) > 1e-11) continue;
      solutions.push_back(std::move(full));
    } while (next_subset(idx, nc));
  }

  if (!solutions.empty()) {
    Vector centroid(nc, 0.0);
    for (const Vector& v : solutions) {
      for (std::size_t k = 0; k < nc; ++k) centroid[k] += v[k] / static_cast<double>(solutions.size());
    }
    cert.consistent = true;
    cert.residual = reconstruction_error(payoffs, centroid, s);
    cert.weights = std::move(centroid);
    if (cert.residual > 1e-9) fail(ErrorCode::NumericalFailure, "state-price reconstruction failed at node '" + tree.label(n) + "'");
    return cert;
  }

  // Farkas alternative: minimise y.s subject to y.p_c >= 0 and |y_k| <= 1.
  Matrix a(nc + 2 * m, m);
  Vector b(nc + 2 * m, 0.0);
  Vector obj(m);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t r = 0; r < m; ++r) a(c, r) = -payoffs(r, c);
  }
  for (std::size_t r = 0; r < m; ++r) {
    a(nc + 2 * r, r) = 1.0;
    b[nc + 2 * r] = 1.0;
    a(nc + 2 * r + 1, r) = -1.0;
    b[nc + 2 * r + 1] = 1.0;
    obj[r] = -s[r];
  }
  const LpResult lp = solve_lp_vertices(a, b, obj, 1e-12);
  if (!lp.feasible || lp.objective <= 1e-9) {
    fail(ErrorCode::NumericalFailure, "consistency undecided at node '" + tree.label(n) + "'");
  }
  cert.consistent = false;
  cert.violation = restriction.embed(lp.x);
  cert.residual = portfolio_price(market, n, cert.violation);
  return cert;
}

ConsistencyCertificate check_consistency(const TradableSet& market, const ScenarioTree& tree,
                                         const RestrictionSet& restriction) {
  if (restriction.ambient_dim() != market.count()) fail(ErrorCode::DimensionMismatch, "restriction and market disagree");
  ConsistencyCertificate out;
  for (NodeId n = 0; n < tree.size(); ++n) {
    if (!tree.is_leaf(n)) out.nodes.push_back(check_node_consistency(market, tree, restriction, n));
  }
  return out;
}

RateCurve RateCurve::flat(const ScenarioTree& tree, double r) {
  if (!(1.0 + r > 0.0)) fail(ErrorCode::BadRate, "1 + r must be positive");
  RateCurve c;
  c.rates_.assign(tree.size(), r);
  return c;
}

RateCurve RateCurve::from_annual(const ScenarioTree& tree, std::vector<double> annual_rates) {
  if (annual_rates.size() != tree.size()) fail(ErrorCode::DimensionMismatch, "rate vector does not cover the tree");
  RateCurve c;
  c.rates_.assign(tree.size(), std::numeric_limits<double>::quiet_NaN());
  for (NodeId n = 0; n < tree.size(); ++n) {
    const double r = annual_rates[tree.annual_ancestor(n)];
    if (!std::isnan(r) && !(1.0 + r > 0.0)) fail(ErrorCode::BadRate, "1 + r must be positive at '" + tree.label(n) + "'");
    c.rates_[n] = r;
  }
  return c;
}

RateCurve RateCurve::from_bonds(const ScenarioTree& tree, const TradableSet& market) {
  std::vector<double> annual(tree.size(), std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < tree.grid().horizon(); ++i) {
    const auto k = market.bond_for_year(i);
    if (!k) continue;
    for (NodeId n : tree.nodes_in_year(i)) annual[n] = 1.0 / market.prices(n)[*k] - 1.0;
  }
  return from_annual(tree, std::move(annual));
}

bool RateCurve::has(NodeId n) const { return n < rates_.size() && !std::isnan(rates_[n]); }

double RateCurve::rate(NodeId n) const {
  if (!has(n)) fail(ErrorCode::MissingRate, "no risk-free rate available at node " + std::to_string(n));
  return rates_[n];
}

}  // namespace prodval
