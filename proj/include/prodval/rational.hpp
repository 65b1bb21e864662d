#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace prodval {

// Exact date value num/den with den > 0, always stored in lowest terms.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  // Accepts "3", "-2", "1/3", "0.25". Decimal strings are converted exactly.
  static Rational parse(std::string_view text);
  // Best approximation with denominator <= max_den; throws unless it
  // reproduces x within 1e-12.
  static Rational from_double(double x, std::int64_t max_den = 1'000'000);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_integer() const noexcept { return den_ == 1; }
  std::int64_t floor() const noexcept;
  std::int64_t ceil() const noexcept;
  std::string str() const;

  friend bool operator==(const Rational& a, const Rational& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept;
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace prodval
