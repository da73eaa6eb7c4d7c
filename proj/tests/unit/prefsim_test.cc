// tests/unit/prefsim_test.cc

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
#include <map>
#include <random>

#include "apa/corpus.h"
#include "apa/prefsim.h"
#include "test_support.h"

namespace apa {
namespace {

std::map<std::string, double> Flatten(const AssessmentResponse &r) {
  std::map<std::string, double> out;
  if (r.sentence)
    for (Aspect a : r.sentence->Present())
      out["sentence." + std::string(ToString(a))] = r.sentence->Get(a);
  if (r.words)
    for (std::size_t i = 0; i < r.words->size(); ++i)
      for (Aspect a : (*r.words)[i].scores.Present())
        out["words[" + std::to_string(i) + "]." + std::string(ToString(a))] =
            (*r.words)[i].scores.Get(a);
  if (r.phones)
    for (std::size_t g = 0; g < r.phones->size(); ++g)
      for (std::size_t k = 0; k < (*r.phones)[g].size(); ++k)
        out["phones[" + std::to_string(g) + "][" + std::to_string(k) + "].accuracy"] =
            (*r.phones)[g][k].accuracy;
  return out;
}

AssessmentResponse TwoWords() {
  AssessmentResponse r;
  ScoreSet s;
  s.Set(Aspect::kAccuracy, 8);
  s.Set(Aspect::kFluency, 9);
  s.Set(Aspect::kProsody, 7);
  s.Set(Aspect::kCompleteness, 10);
  s.Set(Aspect::kTotal, 8);
  r.sentence = s;
  std::vector<ResponseWord> words(2);
  for (auto &w : words) {
    w.token = "W";
    w.scores.Set(Aspect::kAccuracy, 8);
    w.scores.Set(Aspect::kStress, 10);
    w.scores.Set(Aspect::kTotal, 8);
  }
  r.words = words;
  r.phones = PhoneGroups{{{"A", 9}, {"B", 9}, {"C", 9}}, {{"D", 8}}};
  return r;
}

Perturbation Applied(Granularity g, Aspect a, double delta, std::size_t group = 0,
                     std::size_t index = 0) {
  Perturbation p;
  p.target = {g, a};
  p.group = group;
  p.index = index;
  p.applied_delta = delta;
  return p;
}

TEST(PropagateTest, WordAccuracyMovesWordTotalByHalf) {
  AssessmentResponse draft = TwoWords();
  (*draft.words)[0].scores.Set(Aspect::kAccuracy, 5);
  Perturbation p = Applied(Granularity::kWord, Aspect::kAccuracy, -3);
  const AssessmentResponse out = Propagate(draft, p);
  EXPECT_EQ((*out.words)[0].scores.Get(Aspect::kTotal), 6.5);
  EXPECT_EQ((*out.words)[1].scores.Get(Aspect::kTotal), 8.0);
  EXPECT_EQ(out.sentence->Get(Aspect::kTotal), 8.0);
  ASSERT_EQ(p.changes.size(), 1u);
  EXPECT_EQ(p.changes[0].field, "words[0].total");
}

TEST(PropagateTest, SentenceProsodyMovesTotalByThird) {
  AssessmentResponse draft = TwoWords();
  draft.sentence->Set(Aspect::kProsody, 9);
  Perturbation p = Applied(Granularity::kSentence, Aspect::kProsody, 2);
  const AssessmentResponse out = Propagate(draft, p);
  EXPECT_EQ(out.sentence->Get(Aspect::kTotal), 8.7);
}

TEST(PropagateTest, CompletenessLeavesTotal) {
  AssessmentResponse draft = TwoWords();
  draft.sentence->Set(Aspect::kCompleteness, 7);
  Perturbation p = Applied(Granularity::kSentence, Aspect::kCompleteness, -3);
  EXPECT_EQ(Propagate(draft, p).sentence->Get(Aspect::kTotal), 8.0);
  EXPECT_TRUE(p.changes.empty());
}

TEST(PropagateTest, PhoneChangeChainsUpward) {
  AssessmentResponse draft = TwoWords();
  (*draft.phones)[0][1].accuracy = 6;
  Perturbation p = Applied(Granularity::kPhone, Aspect::kAccuracy, -3, 0, 1);
  const AssessmentResponse out = Propagate(draft, p);
  EXPECT_EQ((*out.words)[0].scores.Get(Aspect::kAccuracy), 7.0);  // -3/3
  EXPECT_EQ((*out.words)[0].scores.Get(Aspect::kTotal), 7.5);     // -1/2
  EXPECT_EQ(out.sentence->Get(Aspect::kAccuracy), 7.5);           // -1/|words|
  EXPECT_EQ(out.sentence->Get(Aspect::kTotal), 7.8);              // -0.5/3
  EXPECT_EQ(p.changes.size(), 4u);
}

TEST(PropagateTest, ClampsAtScale) {
  AssessmentResponse draft = TwoWords();
  (*draft.words)[1].scores.Set(Aspect::kTotal, 9.5);
  (*draft.words)[1].scores.Set(Aspect::kAccuracy, 10);
  Perturbation p = Applied(Granularity::kWord, Aspect::kAccuracy, 2, 1);
  EXPECT_EQ((*Propagate(draft, p).words)[1].scores.Get(Aspect::kTotal), 10.0);
  EXPECT_EQ(p.changes[0].after, 10.0);
}

PerturbConfig Config(const std::string &target, DirectionPolicy d = DirectionPolicy::kRandom) {
  PerturbConfig c;
  c.target = PerturbTarget::Parse(target);
  c.direction = d;
  return c;
}

TEST(PerturbResponseTest, ForcedDirections) {
  Rng rng(1);
  const auto down = PerturbResponse(TwoWords(), Config("word:accuracy", DirectionPolicy::kDecrease), rng);
  ASSERT_TRUE(down);
  const Perturbation &p = down->perturbation;
  EXPECT_LE(p.applied_delta, -2.0);
  EXPECT_GE(p.applied_delta, -4.0);
  EXPECT_EQ(p.applied_delta, p.requested_delta);
  EXPECT_EQ(p.changes[0].field, p.item);

  Rng r2(2);
  AssessmentResponse gold = TwoWords();
  for (auto &w : *gold.words) w.scores.Set(Aspect::kAccuracy, 9);
  const auto up = PerturbResponse(gold, Config("word:accuracy", DirectionPolicy::kIncrease), r2);
  ASSERT_TRUE(up);
  EXPECT_EQ(up->perturbation.changes[0].after, 10.0);
  EXPECT_DOUBLE_EQ(up->perturbation.applied_delta, 1.0);
}

TEST(PerturbResponseTest, BoundaryResamplesDirection) {
  AssessmentResponse gold = TwoWords();
  gold.sentence->Set(Aspect::kFluency, 10);
  int resampled = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    Rng rng(s);
    const auto r = PerturbResponse(gold, Config("sentence:fluency"), rng);
    ASSERT_TRUE(r);
    EXPECT_LT(r->perturbation.applied_delta, 0.0);
    resampled += r->perturbation.direction_resampled;
  }
  EXPECT_GT(resampled, 0);
  Rng rng(0);
  EXPECT_FALSE(PerturbResponse(gold, Config("sentence:fluency", DirectionPolicy::kIncrease), rng));
}

TEST(PerturbResponseTest, MissingTargetThrows) {
  AssessmentResponse gold = TwoWords();
  gold.phones.reset();
  Rng rng(0);
  EXPECT_THROW(PerturbResponse(gold, Config("phone:accuracy"), rng), InvalidArgument);
  PerturbConfig bad = Config("word:stress");
  bad.delta_min = 5;
  bad.delta_max = 4;
  EXPECT_THROW(bad.Validate(), InvalidArgument);
  EXPECT_THROW(PerturbTarget::Parse("word:fluency"), InvalidArgument);
}

double Shifted(double before, double delta, const AspectScale &s = scales::Score()) {
  return Clamp(RoundToTenth(before + delta), s);
}

// Every pair: gold is chosen, the rejected side differs only in recorded
// fields, scores stay on scale and totals follow the propagation rules.
TEST(PerturbPropertyTest, ChangesAreExactlyTheDiff) {
  std::mt19937_64 gen(41);
  const TaskSpec full = TaskSpec::Full();
  const char *targets[] = {"sentence:accuracy", "sentence:fluency", "sentence:prosody",
                           "sentence:completeness", "sentence:total", "word:accuracy",
                           "word:stress", "word:total", "phone:accuracy"};
  int checked = 0;
  for (int k = 0; k < 600; ++k) {
    const UtteranceAnnotation a = testing::RandomAnnotation(gen, "u" + std::to_string(k));
    PerturbConfig c = Config(targets[k % 9]);
    Rng rng = RngFor(7, a.utterance_id, 0);
    const auto pair = Perturb(a, full, c, rng);
    if (!pair) continue;
    ++checked;
    EXPECT_EQ(pair->positive, FromAnnotation(a, full));
    const auto pos = Flatten(pair->positive), neg = Flatten(pair->negative);
    ASSERT_EQ(pos.size(), neg.size());
    std::map<std::string, const FieldChange *> listed;
    for (const FieldChange &ch : pair->perturbation.changes) {
      EXPECT_EQ(listed.count(ch.field), 0u) << ch.field;
      listed[ch.field] = &ch;
      EXPECT_EQ(pos.at(ch.field), ch.before) << ch.field;
      EXPECT_EQ(neg.at(ch.field), ch.after) << ch.field;
      EXPECT_NE(ch.before, ch.after) << ch.field;
    }
    for (const auto &[field, v] : pos)
      if (neg.at(field) != v) EXPECT_EQ(listed.count(field), 1u) << field;
    for (const auto &[field, v] : neg) {
      EXPECT_GE(v, 0.0) << field;
      EXPECT_LE(v, 10.0) << field;
    }

    const Perturbation &p = pair->perturbation;
    EXPECT_GE(std::abs(p.requested_delta), 2.0);
    EXPECT_LE(std::abs(p.requested_delta), 4.0);
    EXPECT_EQ(p.changes[0].field, p.item);
    EXPECT_EQ(p.changes[0].after > p.changes[0].before, p.applied_delta > 0);

    // Recompute totals from the rule.
    const Granularity g = c.target.granularity;
    const Aspect asp = c.target.aspect;
    if (g == Granularity::kSentence && asp != Aspect::kTotal) {
      EXPECT_EQ(pair->negative.sentence->Get(Aspect::kTotal),
                Shifted(pair->positive.sentence->Get(Aspect::kTotal),
                        p.applied_delta * TotalShare(g, asp)));
    } else if (g == Granularity::kWord && asp != Aspect::kTotal) {
      EXPECT_EQ((*pair->negative.words)[p.group].scores.Get(Aspect::kTotal),
                Shifted((*pair->positive.words)[p.group].scores.Get(Aspect::kTotal),
                        p.applied_delta / 2));
    } else if (g == Granularity::kPhone) {
      const auto &pw = (*pair->positive.words)[p.group].scores;
      const auto &nw = (*pair->negative.words)[p.group].scores;
      const double n = static_cast<double>((*pair->positive.phones)[p.group].size());
      EXPECT_EQ(nw.Get(Aspect::kAccuracy),
                Shifted(pw.Get(Aspect::kAccuracy), p.applied_delta / n));
      const double wd = RoundToTenth(nw.Get(Aspect::kAccuracy) - pw.Get(Aspect::kAccuracy));
      EXPECT_EQ(nw.Get(Aspect::kTotal), Shifted(pw.Get(Aspect::kTotal), wd / 2));
      const double words = static_cast<double>(pair->positive.words->size());
      EXPECT_EQ(pair->negative.sentence->Get(Aspect::kAccuracy),
                Shifted(pair->positive.sentence->Get(Aspect::kAccuracy), wd / words));
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(PerturbPairTest, BothPerturbedMode) {
  std::mt19937_64 gen(42);
  const UtteranceAnnotation a = testing::RandomAnnotation(gen, "u");
  PerturbConfig c = Config("sentence:fluency");
  c.mode = PairMode::kBothPerturbed;
  UtteranceAnnotation mid = a;
  mid.sentence.fluency = 5;
  Rng rng(3);
  const auto pair = Perturb(mid, TaskSpec::Full(), c, rng);
  ASSERT_TRUE(pair);
  ASSERT_TRUE(pair->positive_perturbation);
  EXPECT_GT(pair->positive.sentence->Get(Aspect::kFluency), 5.0);
  EXPECT_LT(pair->negative.sentence->Get(Aspect::kFluency), 5.0);
}

TEST(GenerateDatasetTest, DeterministicAcrossRunsAndThreads) {
  const LoadResult corpus = LoadCorpus(testing::DataDir() / "mini_corpus");
  const CorpusSplit &train = *corpus.Split("train");
  const TaskSpec full = TaskSpec::Full();
  PerturbConfig c = Config("phone:accuracy");
  c.seed = 99;
  auto dump = [&](std::size_t threads) {
    std::string out;
    for (const auto &p : GenerateDataset(train, full, c, 3, threads).pairs)
      out += PairToJson(p, full).dump() + "\n";
    return out;
  };
  const std::string once = dump(1);
  EXPECT_EQ(dump(1), once);
  EXPECT_EQ(dump(4), once);
  const PairDataset d = GenerateDataset(train, full, c, 3);
  EXPECT_LE(d.pairs.size(), 18u);
  EXPECT_EQ(d.pairs.size() + d.skipped_degenerate, 18u);
  c.seed = 100;
  EXPECT_NE(dump(1), once);
}

TEST(GenerateDatasetTest, NoPhonesMeansPhoneTargetSkipped) {
  std::mt19937_64 gen(43);
  CorpusSplit s;
  for (int k = 0; k < 5; ++k)
    s.utterances.push_back(testing::RandomAnnotation(gen, "u" + std::to_string(k), false));
  const PairDataset d =
      GenerateDataset(s, TaskSpec::Parse("sentence;word;phone"), Config("phone:accuracy"), 2);
  EXPECT_TRUE(d.pairs.empty());
  EXPECT_EQ(d.skipped_missing_target, 5u);
  EXPECT_THROW(GenerateDataset(s, TaskSpec::Parse("sentence"), Config("word:accuracy"), 1),
               InvalidArgument);
}

TEST(PairToJsonTest, Fields) {
  std::mt19937_64 gen(44);
  const UtteranceAnnotation a = testing::RandomAnnotation(gen, "u9");
  const TaskSpec t = TaskSpec::Parse("sentence:accuracy,total");
  Rng rng(5);
  const auto pair = Perturb(a, t, Config("sentence:accuracy"), rng);
  ASSERT_TRUE(pair);
  const Json j = PairToJson(*pair, t);
  EXPECT_EQ(j["utterance_id"], "u9");
  EXPECT_EQ(Parse(j["chosen"].get<std::string>(), t).response, pair->positive);
  EXPECT_EQ(Parse(j["rejected"].get<std::string>(), t).response, pair->negative);
  EXPECT_EQ(j["perturbation"]["target"], "sentence:accuracy");
  EXPECT_NE(j["prompt"].get<std::string>().find("Sentence Scores: {Acc} {Tot}"), std::string::npos);
}

}  // namespace
}  // namespace apa
