// core/include/apa/prefsim.h

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

#ifndef APA_PREFSIM_H_
#define APA_PREFSIM_H_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "apa/corpus.h"
#include "apa/json_io.h"
#include "apa/promptgen.h"
#include "apa/respparse.h"
#include "apa/task_spec.h"

namespace apa {

using Rng = std::mt19937_64;

// Uniform double in [0,1) from the top 53 bits of one draw. Defined here so
// output does not depend on the standard library's distributions.
double Uniform01(Rng &rng);

// Generator seeded from (seed, utterance_id, draw index), so results do not
// depend on the order utterances are processed in.
Rng RngFor(std::uint64_t seed, std::string_view utterance_id, std::uint64_t index);

enum class DirectionPolicy { kRandom, kIncrease, kDecrease };

// kGoldChosen: chosen = gold, rejected = gold shifted by +-delta.
// kBothPerturbed: chosen = gold shifted up, rejected = gold shifted down.
enum class PairMode { kGoldChosen, kBothPerturbed };

struct PerturbTarget {
  Granularity granularity = Granularity::kSentence;
  Aspect aspect = Aspect::kAccuracy;

  // "word:accuracy"
  static PerturbTarget Parse(std::string_view text);
  std::string ToString() const;
  bool operator==(const PerturbTarget &) const = default;
};

struct PerturbConfig {
  double delta_min = 2.0;
  double delta_max = 4.0;
  PerturbTarget target;
  DirectionPolicy direction = DirectionPolicy::kRandom;
  PairMode mode = PairMode::kGoldChosen;
  std::uint64_t seed = 0;

  // Throws InvalidArgument. With a task, also checks the target is in it.
  void Validate(const TaskSpec *task = nullptr) const;
};

struct FieldChange {
  std::string field;  // "sentence.total", "words[2].accuracy", "phones[1][0].accuracy"
  double before = 0.0;
  double after = 0.0;
};

// What was changed and why. `changes` lists the target first, then every
// field the consistency rules touched.
struct Perturbation {
  PerturbTarget target;
  std::string item;              // field path of the perturbed score
  std::size_t group = 0;         // word index, or phone group
  std::size_t index = 0;         // phone index within the group
  double requested_delta = 0.0;  // signed draw, one decimal
  double applied_delta = 0.0;    // after clamping to the scale
  bool direction_resampled = false;
  std::vector<FieldChange> changes;
};

// Scale a response score of (granularity, aspect) is clamped to.
const AspectScale &PerturbScale(Granularity g, Aspect a);

// Share of a change in `a` that flows into the same level's total:
// 1/3 for sentence accuracy/fluency/prosody, 1/2 for word
// accuracy/stress, 0 otherwise.
double TotalShare(Granularity g, Aspect a);

struct Perturbed {
  AssessmentResponse response;
  Perturbation perturbation;
};

// Shifts one target score (a random word or phone for those granularities)
// by a signed delta with |delta| in [delta_min, delta_max], then applies
// Propagate. If clamping leaves the score unchanged the direction is
// flipped once; returns nullopt when both directions are degenerate.
// Throws InvalidArgument when the response lacks the target.
std::optional<Perturbed> PerturbResponse(const AssessmentResponse &gold,
                                         const PerturbConfig &c, Rng &rng,
                                         std::optional<DirectionPolicy> force = {});

// Restores consistency after the single change recorded in `p.changes[0]`:
// a phone change moves its word's accuracy by the mean per-phone delta and
// sentence accuracy by the mean per-word delta; accuracy/fluency/prosody
// and word accuracy/stress changes move their level's total by
// TotalShare. Shifted values are rounded to one decimal and clamped.
// Every changed field is appended to `p.changes`.
AssessmentResponse Propagate(AssessmentResponse draft, Perturbation &p);

struct PreferencePair {
  std::string utterance_id;
  RenderedPrompt prompt;
  AssessmentResponse positive;
  AssessmentResponse negative;
  Perturbation perturbation;                          // positive -> negative
  std::optional<Perturbation> positive_perturbation;  // kBothPerturbed only
};

std::optional<PreferencePair> Perturb(const UtteranceAnnotation &a,
                                      const TaskSpec &task,
                                      const PerturbConfig &c, Rng &rng);

struct PairDataset {
  std::vector<PreferencePair> pairs;
  std::size_t utterances = 0;
  std::size_t skipped_missing_target = 0;  // utterances
  std::size_t skipped_degenerate = 0;      // draws
};

// `per_utterance` pairs per utterance, in utterance order. Deterministic in
// c.seed regardless of `threads`.
PairDataset GenerateDataset(const CorpusSplit &corpus, const TaskSpec &task,
                            const PerturbConfig &c, std::size_t per_utterance,
                            std::size_t threads = 1);

// {utterance_id, prompt, chosen, rejected, perturbation}
Json PairToJson(const PreferencePair &p, const TaskSpec &task);

}  // namespace apa

#endif  // APA_PREFSIM_H_
