// core/src/prefsim.cc

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

#include "apa/prefsim.h"

#include <algorithm>
#include <exception>
#include <thread>

#include "apa/error.h"
#include "apa/text_util.h"

namespace apa {

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string WordPath(std::size_t i, Aspect a) {
  return "words[" + std::to_string(i) + "]." + std::string(ToString(a));
}

std::string PhonePath(std::size_t g, std::size_t k) {
  return "phones[" + std::to_string(g) + "][" + std::to_string(k) + "].accuracy";
}

std::string SentencePath(Aspect a) { return "sentence." + std::string(ToString(a)); }

std::size_t PickIndex(Rng &rng, std::size_t n) {
  auto i = static_cast<std::size_t>(Uniform01(rng) * static_cast<double>(n));
  return std::min(i, n - 1);
}

Json ChangeToJson(const Perturbation &p) {
  Json changes = Json::array();
  for (const FieldChange &c : p.changes)
    changes.push_back({{"field", c.field}, {"before", c.before}, {"after", c.after}});
  return {{"target", p.target.ToString()},
          {"item", p.item},
          {"requested_delta", p.requested_delta},
          {"applied_delta", p.applied_delta},
          {"direction_resampled", p.direction_resampled},
          {"changes", std::move(changes)}};
}

}  // namespace

double Uniform01(Rng &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Rng RngFor(std::uint64_t seed, std::string_view utterance_id, std::uint64_t index) {
  std::uint64_t s = SplitMix64(seed);
  s = SplitMix64(s ^ Fnv1a(utterance_id));
  s = SplitMix64(s ^ (index * 0xD1B54A32D192ED03ULL));
  return Rng(s);
}

PerturbTarget PerturbTarget::Parse(std::string_view text) {
  const auto parts = Split(Trim(text), ':');
  if (parts.empty() || parts.size() > 2)
    throw InvalidArgument("prefsim", "target must look like granularity:aspect, got '" +
                                         std::string(text) + "'");
  const auto g = ParseGranularity(Trim(parts[0]));
  if (!g) throw InvalidArgument("prefsim", "unknown granularity in target '" + std::string(text) + "'");
  Aspect a = Aspect::kAccuracy;
  if (parts.size() == 2) {
    const auto pa = ParseAspect(Trim(parts[1]));
    if (!pa) throw InvalidArgument("prefsim", "unknown aspect in target '" + std::string(text) + "'");
    a = *pa;
  } else if (*g != Granularity::kPhone) {
    throw InvalidArgument("prefsim", "target '" + std::string(text) + "' needs an aspect");
  }
  if (!IsLegal(*g, a))
    throw InvalidArgument("prefsim", "target '" + std::string(text) + "' names an illegal aspect");
  return {*g, a};
}

std::string PerturbTarget::ToString() const {
  return std::string(apa::ToString(granularity)) + ":" + std::string(apa::ToString(aspect));
}

void PerturbConfig::Validate(const TaskSpec *task) const {
  if (!(delta_min > 0.0) || !(delta_max >= delta_min))
    throw InvalidArgument("prefsim", "need 0 < delta_min <= delta_max");
  if (!IsLegal(target.granularity, target.aspect))
    throw InvalidArgument("prefsim", "illegal target " + target.ToString());
  if (task && !task->Has(target.granularity, target.aspect))
    throw InvalidArgument("prefsim", "target " + target.ToString() + " is not part of task " +
                                         task->ToString());
}

const AspectScale &PerturbScale(Granularity g, Aspect a) {
  if (g == Granularity::kWord && a == Aspect::kStress) return scales::StressRater();
  return scales::Score();
}

double TotalShare(Granularity g, Aspect a) {
  if (g == Granularity::kSentence &&
      (a == Aspect::kAccuracy || a == Aspect::kFluency || a == Aspect::kProsody))
    return 1.0 / 3.0;
  if (g == Granularity::kWord && (a == Aspect::kAccuracy || a == Aspect::kStress))
    return 1.0 / 2.0;
  return 0.0;
}

AssessmentResponse Propagate(AssessmentResponse draft, Perturbation &p) {
  // Returns the change actually made.
  auto shift = [&p](ScoreSet &set, Aspect a, const AspectScale &scale, double delta,
                    const std::string &path) {
    if (!set.Has(a) || delta == 0.0) return 0.0;
    const double before = set.Get(a);
    const double after = Clamp(RoundToTenth(before + delta), scale);
    if (after == before) return 0.0;
    set.Set(a, after);
    p.changes.push_back({path, before, after});
    return RoundToTenth(after - before);
  };
  const double d = p.applied_delta;
  const Aspect asp = p.target.aspect;
  switch (p.target.granularity) {
    case Granularity::kSentence:
      if (draft.sentence)
        shift(*draft.sentence, Aspect::kTotal, scales::Score(),
              d * TotalShare(Granularity::kSentence, asp), SentencePath(Aspect::kTotal));
      break;
    case Granularity::kWord:
      if (draft.words && p.group < draft.words->size())
        shift((*draft.words)[p.group].scores, Aspect::kTotal, scales::Score(),
              d * TotalShare(Granularity::kWord, asp), WordPath(p.group, Aspect::kTotal));
      break;
    case Granularity::kPhone: {
      if (!draft.phones || p.group >= draft.phones->size()) break;
      const double n = static_cast<double>((*draft.phones)[p.group].size());
      double word_delta = d / n;
      if (draft.words && p.group < draft.words->size() &&
          (*draft.words)[p.group].scores.Has(Aspect::kAccuracy)) {
        ScoreSet &w = (*draft.words)[p.group].scores;
        word_delta = shift(w, Aspect::kAccuracy, scales::Score(), word_delta,
                           WordPath(p.group, Aspect::kAccuracy));
        shift(w, Aspect::kTotal, scales::Score(),
              word_delta * TotalShare(Granularity::kWord, Aspect::kAccuracy),
              WordPath(p.group, Aspect::kTotal));
      }
      if (draft.sentence && draft.sentence->Has(Aspect::kAccuracy)) {
        const double words = static_cast<double>(
            draft.words ? draft.words->size() : draft.phones->size());
        const double s = shift(*draft.sentence, Aspect::kAccuracy, scales::Score(),
                               word_delta / words, SentencePath(Aspect::kAccuracy));
        shift(*draft.sentence, Aspect::kTotal, scales::Score(),
              s * TotalShare(Granularity::kSentence, Aspect::kAccuracy),
              SentencePath(Aspect::kTotal));
      }
      break;
    }
  }
  return draft;
}

std::optional<Perturbed> PerturbResponse(const AssessmentResponse &gold,
                                         const PerturbConfig &c, Rng &rng,
                                         std::optional<DirectionPolicy> force) {
  c.Validate();
  const PerturbTarget &t = c.target;
  Perturbation p;
  p.target = t;
  AssessmentResponse draft = gold;

  // Locate the score to move.
  ScoreSet *set = nullptr;
  double phone_value = 0.0;
  ResponsePhone *phone = nullptr;
  switch (t.granularity) {
    case Granularity::kSentence:
      if (!draft.sentence || !draft.sentence->Has(t.aspect))
        throw InvalidArgument("prefsim", "response lacks target " + t.ToString());
      set = &*draft.sentence;
      p.item = SentencePath(t.aspect);
      break;
    case Granularity::kWord:
      if (!draft.words || draft.words->empty() || !draft.words->front().scores.Has(t.aspect))
        throw InvalidArgument("prefsim", "response lacks target " + t.ToString());
      p.group = PickIndex(rng, draft.words->size());
      set = &(*draft.words)[p.group].scores;
      p.item = WordPath(p.group, t.aspect);
      break;
    case Granularity::kPhone: {
      if (!draft.phones || draft.phones->empty())
        throw InvalidArgument("prefsim", "response lacks target " + t.ToString());
      std::size_t total = 0;
      for (const auto &g : *draft.phones) total += g.size();
      std::size_t flat = PickIndex(rng, total);
      for (std::size_t g = 0; g < draft.phones->size(); ++g) {
        if (flat < (*draft.phones)[g].size()) {
          p.group = g;
          p.index = flat;
          break;
        }
        flat -= (*draft.phones)[g].size();
      }
      phone = &(*draft.phones)[p.group][p.index];
      phone_value = phone->accuracy;
      p.item = PhonePath(p.group, p.index);
      break;
    }
  }

  const double magnitude =
      RoundToTenth(c.delta_min + Uniform01(rng) * (c.delta_max - c.delta_min));
  const DirectionPolicy policy = force.value_or(c.direction);
  double sign = 1.0;
  switch (policy) {
    case DirectionPolicy::kRandom: sign = Uniform01(rng) < 0.5 ? -1.0 : 1.0; break;
    case DirectionPolicy::kIncrease: sign = 1.0; break;
    case DirectionPolicy::kDecrease: sign = -1.0; break;
  }

  const AspectScale &scale = PerturbScale(t.granularity, t.aspect);
  const double before = set ? set->Get(t.aspect) : phone_value;
  auto moved = [&](double s) { return Clamp(RoundToTenth(before + s * magnitude), scale); };
  double after = moved(sign);
  if (after == before) {
    if (policy != DirectionPolicy::kRandom) return std::nullopt;
    sign = -sign;
    p.direction_resampled = true;
    after = moved(sign);
    if (after == before) return std::nullopt;
  }
  if (set)
    set->Set(t.aspect, after);
  else
    phone->accuracy = after;
  p.requested_delta = sign * magnitude;
  p.applied_delta = RoundToTenth(after - before);
  p.changes.push_back({p.item, before, after});
  AssessmentResponse out = Propagate(std::move(draft), p);
  return Perturbed{std::move(out), std::move(p)};
}

std::optional<PreferencePair> Perturb(const UtteranceAnnotation &a, const TaskSpec &task,
                                      const PerturbConfig &c, Rng &rng) {
  c.Validate(&task);
  PreferencePair pair;
  pair.utterance_id = a.utterance_id;
  pair.prompt = Render(a, task);
  const AssessmentResponse gold = FromAnnotation(a, task);
  if (c.mode == PairMode::kGoldChosen) {
    auto neg = PerturbResponse(gold, c, rng);
    if (!neg) return std::nullopt;
    pair.positive = gold;
    pair.negative = std::move(neg->response);
    pair.perturbation = std::move(neg->perturbation);
    return pair;
  }
  auto up = PerturbResponse(gold, c, rng, DirectionPolicy::kIncrease);
  auto down = PerturbResponse(gold, c, rng, DirectionPolicy::kDecrease);
  if (!up || !down) return std::nullopt;
  pair.positive = std::move(up->response);
  pair.positive_perturbation = std::move(up->perturbation);
  pair.negative = std::move(down->response);
  pair.perturbation = std::move(down->perturbation);
  return pair;
}

PairDataset GenerateDataset(const CorpusSplit &corpus, const TaskSpec &task,
                            const PerturbConfig &c, std::size_t per_utterance,
                            std::size_t threads) {
  c.Validate(&task);
  const std::size_t n = corpus.utterances.size();
  struct Slot {
    std::vector<PreferencePair> pairs;
    bool missing = false;
    std::size_t degenerate = 0;
  };
  std::vector<Slot> slots(n);
  const bool needs_phones =
      task.Has(Granularity::kPhone) || c.target.granularity == Granularity::kPhone;

  auto work = [&](std::size_t i) {
    const UtteranceAnnotation &a = corpus.utterances[i];
    Slot &slot = slots[i];
    if ((needs_phones && (!a.phones || a.reference_phones.empty())) || a.words.empty()) {
      slot.missing = true;
      return;
    }
    for (std::size_t k = 0; k < per_utterance; ++k) {
      Rng rng = RngFor(c.seed, a.utterance_id, k);
      auto pair = Perturb(a, task, c, rng);
      if (pair)
        slot.pairs.push_back(std::move(*pair));
      else
        ++slot.degenerate;
    }
  };

  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < n; i += threads) work(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    pool.clear();
    for (auto &e : errors)
      if (e) std::rethrow_exception(e);
  }

  PairDataset out;
  out.utterances = n;
  for (Slot &s : slots) {
    if (s.missing) ++out.skipped_missing_target;
    out.skipped_degenerate += s.degenerate;
    for (auto &p : s.pairs) out.pairs.push_back(std::move(p));
  }
  return out;
}

Json PairToJson(const PreferencePair &p, const TaskSpec &task) {
  Json j = {{"utterance_id", p.utterance_id},
            {"prompt", p.prompt.text},
            {"chosen", Serialize(p.positive, task)},
            {"rejected", Serialize(p.negative, task)},
            {"perturbation", ChangeToJson(p.perturbation)}};
  if (p.positive_perturbation) j["chosen_perturbation"] = ChangeToJson(*p.positive_perturbation);
  return j;
}

}  // namespace apa
