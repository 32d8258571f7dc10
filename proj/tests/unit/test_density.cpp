#include <cmath>

#include <gtest/gtest.h>

#include "driftscope/density.hpp"
#include "driftscope/error.hpp"
#include "driftscope/smalltime.hpp"

using namespace driftscope;

TEST(Density, FromLogCarriesValuesBelowDoubleRange) {
  const double lg = -800.0;
  const Density d = Density::from_log(lg);
  EXPECT_NEAR(d.log(), lg, 1e-12);
  EXPECT_EQ(d.linear(), 0.0);
  EXPECT_GE(d.mantissa(), 1.0);
  EXPECT_LT(d.mantissa(), 10.0);
  EXPECT_EQ(d.exponent(), -348);
}

TEST(Density, StringRoundTripIsExact) {
  for (double lg : {-800.0, -1.0, 0.0, 3.3, -123.456}) {
    const Density d = Density::from_log(lg);
    const Density back = Density::parse(d.to_string());
    EXPECT_EQ(back.mantissa(), d.mantissa());
    EXPECT_EQ(back.exponent(), d.exponent());
  }
}

TEST(Density, ParsesOrdinaryNumbers) {
  EXPECT_NEAR(Density::parse("0.5e-3").linear(), 5e-4, 1e-19);
  EXPECT_NEAR(Density::parse("12").linear(), 12.0, 1e-14);
  EXPECT_NEAR(Density::parse("3.1415926535897931e-348").log(), std::log(3.1415926535897931) - 348 * std::log(10.0),
              1e-12);
}

TEST(Density, RejectsNonpositiveAndMalformed) {
  EXPECT_THROW(Density::parse("0"), DataError);
  EXPECT_THROW(Density::parse("-1e-5"), DataError);
  EXPECT_THROW(Density::parse("abc"), DataError);
  EXPECT_THROW(Density::parse("1e"), DataError);
  EXPECT_THROW(Density::from_linear(0.0), DataError);
}

TEST(LogRatio, TrivialValues) {
  EXPECT_EQ(log_ratio(0.3, 0.3), 0.0);
  EXPECT_NEAR(log_ratio(std::exp(1.0) * 0.2, 0.2), 1.0, 1e-15);
  EXPECT_NEAR(log_ratio(Density::from_log(-700.0), Density::from_log(-701.0)), 1.0, 1e-11);
}

TEST(LogRatio, FloorAndNonpositiveRejected) {
  EXPECT_THROW(log_ratio(1e-31, 0.2), DataError);
  EXPECT_THROW(log_ratio(0.2, 0.0), DataError);
  EXPECT_THROW(log_ratio(-1.0, 0.2), DataError);
  EXPECT_NO_THROW(log_ratio(1e-31, 0.2, 1e-40));
}
