#pragma once

#include <span>
#include <vector>

namespace prodval {

struct Atom {
  double value;
  double probability;
};

// Finite distribution with atoms sorted ascending by value and repeated
// values merged. Values may be +/-infinity.
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;
  explicit DiscreteDistribution(std::vector<Atom> atoms);
  DiscreteDistribution(std::span<const double> values, std::span<const double> probabilities);

  static DiscreteDistribution point_mass(double value);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  bool empty() const noexcept { return atoms_.empty(); }
  std::size_t size() const noexcept { return atoms_.size(); }

  double min() const;
  double max() const;
  double mean() const;
  // P[Y >= threshold]
  double prob_at_least(double threshold) const;

  DiscreteDistribution shifted(double a) const;
  DiscreteDistribution scaled(double a) const;
  DiscreteDistribution negated() const;

 private:
  std::vector<Atom> atoms_;
};

}  // namespace prodval
