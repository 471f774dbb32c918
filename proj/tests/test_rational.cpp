#include <gtest/gtest.h>

#include "confsub/rational.hpp"

using confsub::OverflowError;
using confsub::Rational;

TEST(Rational, NormalizesSignAndGcd) {
  Rational r(6, -4);
  EXPECT_EQ(r.num(), -3);
  EXPECT_EQ(r.den(), 2);
  EXPECT_EQ(Rational(0, 5), Rational(0));
  EXPECT_EQ(Rational(0, 5).den(), 1);
}

TEST(Rational, Arithmetic) {
  EXPECT_EQ(Rational(1, 3) + Rational(1, 6), Rational(1, 2));
  EXPECT_EQ(Rational(1, 3) - Rational(1, 2), Rational(-1, 6));
  EXPECT_EQ(Rational(2, 3) * Rational(9, 4), Rational(3, 2));
  EXPECT_EQ(Rational(2, 3) / Rational(4, 9), Rational(3, 2));
  EXPECT_THROW(Rational(1) / Rational(0), std::domain_error);
}

TEST(Rational, OrderingIsExact) {
  EXPECT_LT(Rational(1, 3), Rational(334, 1000));
  EXPECT_GT(Rational(1, 3), Rational(333, 1000));
  EXPECT_LT(Rational(-1, 2), Rational(-1, 3));
  // Neighbouring fractions with large denominators.
  EXPECT_LT(Rational(999999999, 1000000000), Rational(1000000000, 1000000001));
}

TEST(Rational, CeilFloor) {
  EXPECT_EQ(Rational(9, 10).ceil(), 1);
  EXPECT_EQ(Rational(90).ceil(), 90);
  EXPECT_EQ(Rational(-3, 2).ceil(), -1);
  EXPECT_EQ(Rational(-3, 2).floor(), -2);
  EXPECT_EQ(Rational(7, 2).floor(), 3);
  // ceil(0.9 * 100) must be 90, not 91 from a rounding error.
  EXPECT_EQ((Rational::parse("0.9") * Rational(100)).ceil(), 90);
}

TEST(Rational, ParseForms) {
  EXPECT_EQ(Rational::parse("3/10"), Rational(3, 10));
  EXPECT_EQ(Rational::parse("0.3"), Rational(3, 10));
  EXPECT_EQ(Rational::parse("-0.25"), Rational(-1, 4));
  EXPECT_EQ(Rational::parse("7"), Rational(7));
  EXPECT_EQ(Rational::parse(" 2/4 "), Rational(1, 2));
  EXPECT_EQ(Rational::parse(".5"), Rational(1, 2));
  EXPECT_THROW(Rational::parse("1/0"), std::invalid_argument);
  EXPECT_THROW(Rational::parse("abc"), std::invalid_argument);
  EXPECT_THROW(Rational::parse(""), std::invalid_argument);
  EXPECT_THROW(Rational::parse("1/-2"), std::invalid_argument);
}

TEST(Rational, ToStringRoundTrip) {
  for (auto r : {Rational(3, 10), Rational(-7, 3), Rational(0), Rational(5)}) {
    EXPECT_EQ(Rational::parse(r.to_string()), r);
  }
  EXPECT_EQ(Rational(5).to_string(), "5/1");
}

TEST(Rational, OverflowIsReported) {
  Rational big(INT64_MAX / 2);
  EXPECT_THROW(big * Rational(3), OverflowError);
  EXPECT_THROW(Rational::parse("99999999999999999999"), OverflowError);
}
