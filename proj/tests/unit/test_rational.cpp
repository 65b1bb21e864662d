#include <gtest/gtest.h>

#include <cmath>

#include "prodval/error.hpp"
#include "prodval/rational.hpp"

using namespace prodval;

TEST(Rational, ReducesToLowestTerms) {
  const Rational r(6, -4);
  EXPECT_EQ(r.num(), -3);
  EXPECT_EQ(r.den(), 2);
}

TEST(Rational, ParsesIntegersFractionsAndDecimals) {
  EXPECT_EQ(Rational::parse("3"), Rational(3));
  EXPECT_EQ(Rational::parse("-2"), Rational(-2));
  EXPECT_EQ(Rational::parse("1/3"), Rational(1, 3));
  EXPECT_EQ(Rational::parse("0.25"), Rational(1, 4));
}

TEST(Rational, RejectsGarbage) {
  EXPECT_THROW(Rational::parse("abc"), Error);
  EXPECT_THROW(Rational(1, 0), Error);
}

TEST(Rational, FloorAndCeil) {
  EXPECT_EQ(Rational(7, 2).floor(), 3);
  EXPECT_EQ(Rational(7, 2).ceil(), 4);
  EXPECT_EQ(Rational(-7, 2).floor(), -4);
  EXPECT_EQ(Rational(-7, 2).ceil(), -3);
  EXPECT_EQ(Rational(2).floor(), 2);
  EXPECT_EQ(Rational(2).ceil(), 2);
}

TEST(Rational, ArithmeticAndOrdering) {
  EXPECT_EQ(Rational(1, 3) + Rational(1, 6), Rational(1, 2));
  EXPECT_EQ(Rational(1, 2) - Rational(3, 4), Rational(-1, 4));
  EXPECT_LT(Rational(1, 3), Rational(1, 2));
  EXPECT_GT(Rational(2), Rational(3, 2));
}

TEST(Rational, FromDouble) {
  EXPECT_EQ(Rational::from_double(0.5), Rational(1, 2));
  EXPECT_EQ(Rational::from_double(1.0 / 3.0), Rational(1, 3));
  EXPECT_THROW(Rational::from_double(std::nan("")), Error);
}

TEST(Rational, Str) {
  EXPECT_EQ(Rational(1, 2).str(), "1/2");
  EXPECT_EQ(Rational(4).str(), "4");
}
