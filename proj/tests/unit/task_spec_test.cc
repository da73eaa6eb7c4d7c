// tests/unit/task_spec_test.cc

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

#include "apa/task_spec.h"
#include "test_support.h"

namespace apa {
namespace {

TEST(TaskSpecTest, FullHasEveryAspect) {
  const TaskSpec t = TaskSpec::Full();
  EXPECT_EQ(t.Aspects(Granularity::kSentence).size(), 5u);
  EXPECT_EQ(t.Aspects(Granularity::kWord).size(), 3u);
  EXPECT_TRUE(t.Has(Granularity::kPhone, Aspect::kAccuracy));
  EXPECT_EQ(TaskSpec::Parse("full"), t);
  EXPECT_EQ(TaskSpec::Parse("sentence;word;phone"), t);
}

TEST(TaskSpecTest, KeepsCanonicalOrder) {
  const TaskSpec t = TaskSpec::Parse("word:total,accuracy;sentence:fluency,accuracy");
  EXPECT_EQ(t.Aspects(Granularity::kSentence),
            (std::vector<Aspect>{Aspect::kAccuracy, Aspect::kFluency}));
  EXPECT_EQ(t.Aspects(Granularity::kWord), (std::vector<Aspect>{Aspect::kAccuracy, Aspect::kTotal}));
  EXPECT_FALSE(t.Has(Granularity::kPhone));
  EXPECT_EQ(t.ToString(), "sentence:accuracy,fluency;word:accuracy,total");
}

TEST(TaskSpecTest, RejectsBadInput) {
  EXPECT_THROW(TaskSpec::Parse(""), InvalidArgument);
  EXPECT_THROW(TaskSpec::Parse("sentence:stress"), InvalidArgument);
  EXPECT_THROW(TaskSpec::Parse("paragraph"), InvalidArgument);
  EXPECT_THROW(TaskSpec::Parse("phone:total"), InvalidArgument);
  TaskSpec t;
  EXPECT_THROW(t.Add(Granularity::kWord, Aspect::kFluency), InvalidArgument);
}

TEST(TaskSpecTest, ToStringRoundTripsForAllTasks) {
  const auto all = testing::AllTasks();
  EXPECT_EQ(all.size(), 511u);
  for (const TaskSpec &t : all) EXPECT_EQ(TaskSpec::Parse(t.ToString()), t) << t.ToString();
}

}  // namespace
}  // namespace apa
