// tests/unit/scorekit_test.cc

// Copyright 2026  The apa-toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "apa/scorekit.h"
#include "test_support.h"

namespace apa {
namespace {

TEST(ScaleTest, ContinuousAndDiscrete) {
  EXPECT_TRUE(scales::Score().Contains(0.0));
  EXPECT_TRUE(scales::Score().Contains(10.0));
  EXPECT_FALSE(scales::Score().Contains(10.01));
  EXPECT_FALSE(scales::Score().Contains(std::numeric_limits<double>::quiet_NaN()));
  EXPECT_TRUE(scales::StressRater().Contains(5.0));
  EXPECT_FALSE(scales::StressRater().Contains(7.0));
  EXPECT_TRUE(scales::StressAveraged().Contains(7.0));
  EXPECT_FALSE(scales::StressAveraged().Contains(4.9));
  EXPECT_EQ(scales::Score().Describe(), "[0,10]");
  EXPECT_EQ(scales::StressRater().Describe(), "{5,10}");
  EXPECT_EQ(scales::PhoneNative().Describe(), "[0,2]");
}

TEST(ScaleTest, PhoneRescaleRoundTrip) {
  EXPECT_DOUBLE_EQ(RescalePhone(2.0), 10.0);
  EXPECT_DOUBLE_EQ(RescalePhone(1.6), 8.0);
  EXPECT_DOUBLE_EQ(UnscalePhone(8.0), 1.6);
  EXPECT_THROW(RescalePhone(2.1), ScaleError);
  EXPECT_THROW(UnscalePhone(-0.5), ScaleError);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = 2.0 * static_cast<double>(rng() % 1001) / 1000.0;
    EXPECT_NEAR(UnscalePhone(RescalePhone(v)), v, 1e-15);
  }
  PhoneScore p{"AA0", 1.5, PhoneScale::kNative};
  EXPECT_DOUBLE_EQ(p.On(PhoneScale::kRescaled), 7.5);
  EXPECT_DOUBLE_EQ(p.On(PhoneScale::kNative), 1.5);
}

TEST(ScaleTest, ClampSnapsDiscreteTiesDown) {
  EXPECT_EQ(Clamp(12.0, scales::Score()), 10.0);
  EXPECT_EQ(Clamp(-3.0, scales::Score()), 0.0);
  EXPECT_EQ(Clamp(4.2, scales::Score()), 4.2);
  EXPECT_EQ(Clamp(7.5, scales::StressRater()), 5.0);
  EXPECT_EQ(Clamp(7.6, scales::StressRater()), 10.0);
  EXPECT_EQ(Clamp(1.0, scales::StressRater()), 5.0);
}

TEST(ScaleTest, RoundToTenth) {
  EXPECT_EQ(RoundToTenth(0.25), 0.3);
  EXPECT_EQ(RoundToTenth(-0.25), -0.3);
  EXPECT_EQ(RoundToTenth(2.0 / 3.0), 0.7);
  const double z = RoundToTenth(-0.04);
  EXPECT_EQ(z, 0.0);
  EXPECT_FALSE(std::signbit(z));
}

TEST(AspectTest, ParsesLongAndShortForms) {
  EXPECT_EQ(ParseAspect("accuracy"), Aspect::kAccuracy);
  EXPECT_EQ(ParseAspect("Acc"), Aspect::kAccuracy);
  EXPECT_EQ(ParseAspect("prosodic"), Aspect::kProsody);
  EXPECT_EQ(ParseAspect("tol"), Aspect::kTotal);
  EXPECT_EQ(ParseAspect("str"), Aspect::kStress);
  EXPECT_FALSE(ParseAspect("loudness").has_value());
  EXPECT_EQ(ParseGranularity("utterance"), Granularity::kSentence);
  EXPECT_EQ(ParseGranularity("phoneme"), Granularity::kPhone);
  EXPECT_TRUE(IsLegal(Granularity::kWord, Aspect::kStress));
  EXPECT_FALSE(IsLegal(Granularity::kSentence, Aspect::kStress));
  EXPECT_FALSE(IsLegal(Granularity::kPhone, Aspect::kTotal));
  ASSERT_EQ(AspectsOf(Granularity::kSentence).size(), 5u);
  EXPECT_EQ(AspectsOf(Granularity::kSentence)[3], Aspect::kCompleteness);
}

TEST(ValidateTest, RandomAnnotationsAreValid) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto a = testing::RandomAnnotation(rng, "u" + std::to_string(i));
    EXPECT_TRUE(ValidateAnnotation(a).empty());
  }
}

TEST(ValidateTest, ReportsEachViolation) {
  std::mt19937_64 rng(6);
  auto a = testing::RandomAnnotation(rng, "000010011", true, 3);
  a.words[0].stress = 7.0;
  auto v = ValidateAnnotation(a, StressRule::kRater);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "words[0].stress");
  EXPECT_TRUE(ValidateAnnotation(a, StressRule::kAveraged).empty());

  a = testing::RandomAnnotation(rng, "x", true, 3);
  a.sentence.fluency = 11.0;
  a.reference_text.push_back("EXTRA");
  v = ValidateAnnotation(a);
  ASSERT_GE(v.size(), 2u);
  EXPECT_EQ(v[0].field, "sentence.fluency");
  EXPECT_EQ(v[1].field, "words");

  a = testing::RandomAnnotation(rng, "y", true, 3);
  (*a.phones)[0][0] = {"AA0", 1.9, PhoneScale::kNative};
  EXPECT_TRUE(ValidateAnnotation(a).empty());
  (*a.phones)[0][0].accuracy = 2.5;
  v = ValidateAnnotation(a);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "phones[0][0].accuracy");

  a = testing::RandomAnnotation(rng, "z", true, 3);
  a.reference_text[0] = "TWO WORDS";
  a.words[0].word = "";
  (*a.phones)[0].push_back({"K", 5.0, PhoneScale::kRescaled});
  v = ValidateAnnotation(a);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0].field, "reference_text[0]");
  EXPECT_EQ(v[1].field, "words[0].word");
  EXPECT_EQ(v[2].field, "phones[0]");

  a.utterance_id.clear();
  EXPECT_EQ(ValidateAnnotation(a)[0].field, "utterance_id");
}

}  // namespace
}  // namespace apa
