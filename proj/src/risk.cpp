#include "prodval/risk.hpp"

#include <cmath>
#include <string>

#include "prodval/error.hpp"

namespace prodval {

namespace {

constexpr double kLevelSlack = 1e-12;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::BadLevel, "level " + std::to_string(alpha) + " not in (0,1)");
}

}  // namespace

double lower_quantile(const DiscreteDistribution& dist, double u) {
  if (!(u > 0.0 && u <= 1.0)) fail(ErrorCode::BadLevel, "quantile level " + std::to_string(u) + " not in (0,1]");
  if (dist.empty()) fail(ErrorCode::EmptyDistribution, "quantile of empty distribution");
  double cumulative = 0.0;
  for (const Atom& a : dist.atoms()) {
    cumulative += a.probability;
    if (cumulative >= u - kLevelSlack) return a.value;
  }
  return dist.atoms().back().value;
}

double value_at_risk(const DiscreteDistribution& dist, double alpha) {
  check_alpha(alpha);
  if (dist.empty()) fail(ErrorCode::EmptyDistribution, "VaR of empty distribution");
  // q_{1-alpha}(-Y) walked from the top of Y without building -Y.
  const double u = 1.0 - alpha;
  double cumulative = 0.0;
  const auto& atoms = dist.atoms();
  for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
    cumulative += it->probability;
    if (cumulative >= u - kLevelSlack) return -it->value;
  }
  return -atoms.front().value;
}

double expected_shortfall(const DiscreteDistribution& dist, double alpha) {
  check_alpha(alpha);
  if (dist.empty()) fail(ErrorCode::EmptyDistribution, "ES of empty distribution");
  double integral = 0.0;
  double lower = 0.0;
  for (const Atom& a : dist.atoms()) {
    const double upper = std::min(lower + a.probability, alpha);
    const double length = upper - lower;
    if (length > 0.0) integral += a.value * length;
    lower += a.probability;
    if (lower >= alpha) break;
  }
  return -integral / alpha;
}

double apply_measure(const RiskMeasureSpec& spec, const DiscreteDistribution& dist) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FullMeasure>) {
          return -dist.min();
        } else if constexpr (std::is_same_v<T, ValueAtRisk>) {
          return value_at_risk(dist, s.alpha);
        } else {
          return expected_shortfall(dist, s.alpha);
        }
      },
      spec);
}

void validate(const RiskMeasureSpec& spec) {
  if (const auto* v = std::get_if<ValueAtRisk>(&spec)) check_alpha(v->alpha);
  if (const auto* e = std::get_if<ExpectedShortfall>(&spec)) check_alpha(e->alpha);
}

}  // namespace prodval
