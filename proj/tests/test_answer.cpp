#include <gtest/gtest.h>

#include "dup/answer.hpp"

using duprompt::AnswerType;
using duprompt::Decimal;
using duprompt::NormalizedAnswer;

TEST(Decimal, CanonicalForm) {
  EXPECT_EQ(Decimal::parse("007")->str(), "7");
  EXPECT_EQ(Decimal::parse("45.00")->str(), "45");
  EXPECT_EQ(Decimal::parse("-0.0")->str(), "0");
  EXPECT_EQ(Decimal::parse("-12.50")->str(), "-12.5");
  EXPECT_EQ(Decimal::parse("0.125")->str(), "0.125");
}

TEST(Decimal, RejectsMalformed) {
  for (const char* bad : {"", "-", ".5", "5.", "1,000", "1e3", "+3", "12a", "1.2.3"})
    EXPECT_FALSE(Decimal::parse(bad)) << bad;
}

TEST(Decimal, ScaledDownIsExact) {
  EXPECT_EQ(Decimal::parse("25")->scaled_down(2).str(), "0.25");
  EXPECT_EQ(Decimal::parse("5")->scaled_down(2).str(), "0.05");
  EXPECT_EQ(Decimal::parse("-150")->scaled_down(2).str(), "-1.5");
  EXPECT_EQ(Decimal::parse("0.5")->scaled_down(2).str(), "0.005");
  EXPECT_EQ(Decimal::parse("1234.5")->scaled_down(2).str(), "12.345");
}

TEST(Decimal, ToDouble) {
  EXPECT_DOUBLE_EQ(Decimal::parse("1234567.5")->to_double(), 1234567.5);
  EXPECT_DOUBLE_EQ(Decimal::parse("-0.25")->to_double(), -0.25);
}

TEST(NormalizedAnswer, KindsAndText) {
  const auto n = NormalizedAnswer::number(*Decimal::parse("25"), true);
  EXPECT_EQ(n.kind(), AnswerType::number);
  EXPECT_EQ(n.to_text(), "25%");
  const auto o = NormalizedAnswer::option('c');
  EXPECT_EQ(o.kind(), AnswerType::option);
  EXPECT_EQ(o.to_text(), "C");
  EXPECT_EQ(NormalizedAnswer::yes_no(duprompt::YesNo::no).to_text(), "no");
  EXPECT_EQ(NormalizedAnswer::text("nkmk").to_text(), "nkmk");
  EXPECT_THROW(NormalizedAnswer::option('F'), std::invalid_argument);
}

TEST(NormalizedAnswer, Equality) {
  EXPECT_EQ(NormalizedAnswer::option('b'), NormalizedAnswer::option('B'));
  EXPECT_NE(NormalizedAnswer::number(*Decimal::parse("25")), NormalizedAnswer::number(*Decimal::parse("25"), true));
}

TEST(AnswerType, NamesRoundTrip) {
  for (auto t : {AnswerType::number, AnswerType::option, AnswerType::yes_no, AnswerType::string})
    EXPECT_EQ(duprompt::parse_answer_type(duprompt::to_string(t)), t);
  EXPECT_FALSE(duprompt::parse_answer_type("float"));
}
