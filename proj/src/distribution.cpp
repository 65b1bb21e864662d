#include "prodval/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prodval/error.hpp"

namespace prodval {

DiscreteDistribution::DiscreteDistribution(std::vector<Atom> atoms) {
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!(a.probability > 0.0) || !std::isfinite(a.probability) || std::isnan(a.value)) {
      fail(ErrorCode::InvalidDistribution, "atom probabilities must be positive and values not NaN");
    }
    total += a.probability;
  }
  if (!atoms.empty() && std::abs(total - 1.0) > 1e-12) {
    fail(ErrorCode::InvalidDistribution, "probabilities sum to " + std::to_string(total));
  }
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.value < b.value; });
  for (const Atom& a : atoms) {
    if (!atoms_.empty() && atoms_.back().value == a.value) {
      atoms_.back().probability += a.probability;
    } else {
      atoms_.push_back(a);
    }
  }
}

DiscreteDistribution::DiscreteDistribution(std::span<const double> values,
                                           std::span<const double> probabilities) {
  if (values.size() != probabilities.size()) {
    fail(ErrorCode::DimensionMismatch, "values and probabilities differ in length");
  }
  std::vector<Atom> atoms;
  atoms.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) atoms.push_back({values[k], probabilities[k]});
  *this = DiscreteDistribution(std::move(atoms));
}

DiscreteDistribution DiscreteDistribution::point_mass(double value) {
  return DiscreteDistribution(std::vector<Atom>{{value, 1.0}});
}

double DiscreteDistribution::min() const {
  if (atoms_.empty()) fail(ErrorCode::EmptyDistribution, "min of empty distribution");
  return atoms_.front().value;
}

double DiscreteDistribution::max() const {
  if (atoms_.empty()) fail(ErrorCode::EmptyDistribution, "max of empty distribution");
  return atoms_.back().value;
}

double DiscreteDistribution::mean() const {
  if (atoms_.empty()) fail(ErrorCode::EmptyDistribution, "mean of empty distribution");
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.value * a.probability;
  return m;
}

double DiscreteDistribution::prob_at_least(double threshold) const {
  double p = 0.0;
  for (const Atom& a : atoms_) {
    if (a.value >= threshold) p += a.probability;
  }
  return p;
}

DiscreteDistribution DiscreteDistribution::shifted(double a) const {
  std::vector<Atom> out = atoms_;
  for (Atom& x : out) x.value += a;
  return DiscreteDistribution(std::move(out));
}

DiscreteDistribution DiscreteDistribution::scaled(double a) const {
  std::vector<Atom> out = atoms_;
  for (Atom& x : out) x.value *= a;
  return DiscreteDistribution(std::move(out));
}

DiscreteDistribution DiscreteDistribution::negated() const { return scaled(-1.0); }

}  // namespace prodval
