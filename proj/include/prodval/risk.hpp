#pragma once

#include <variant>

#include "prodval/distribution.hpp"

namespace prodval {

struct FullMeasure {};
struct ValueAtRisk {
  double alpha;
};
struct ExpectedShortfall {
  double alpha;
};

using RiskMeasureSpec = std::variant<FullMeasure, ValueAtRisk, ExpectedShortfall>;

// q_u(Y) = inf{y : P[Y <= y] >= u}, u in (0,1].
double lower_quantile(const DiscreteDistribution& dist, double u);
// VaR_alpha(Y) = q_{1-alpha}(-Y).
double value_at_risk(const DiscreteDistribution& dist, double alpha);
// ES_alpha(Y) = -(1/alpha) * integral_0^alpha q_u(Y) du, integrated exactly.
double expected_shortfall(const DiscreteDistribution& dist, double alpha);
// Full: -min(Y).
double apply_measure(const RiskMeasureSpec& spec, const DiscreteDistribution& dist);

void validate(const RiskMeasureSpec& spec);

}  // namespace prodval
