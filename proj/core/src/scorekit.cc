// core/src/scorekit.cc

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

#include "apa/scorekit.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "apa/error.h"

namespace apa {

namespace {

std::string Num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool HasWhitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::string_view ToString(Granularity g) {
  switch (g) {
    case Granularity::kSentence: return "sentence";
    case Granularity::kWord: return "word";
    case Granularity::kPhone: return "phone";
  }
  return "?";
}

std::string_view ToString(Aspect a) {
  switch (a) {
    case Aspect::kAccuracy: return "accuracy";
    case Aspect::kFluency: return "fluency";
    case Aspect::kProsody: return "prosody";
    case Aspect::kCompleteness: return "completeness";
    case Aspect::kStress: return "stress";
    case Aspect::kTotal: return "total";
  }
  return "?";
}

std::optional<Granularity> ParseGranularity(std::string_view s) {
  const std::string k = Lower(s);
  if (k == "sentence" || k == "utterance") return Granularity::kSentence;
  if (k == "word") return Granularity::kWord;
  if (k == "phone" || k == "phoneme") return Granularity::kPhone;
  return std::nullopt;
}

std::optional<Aspect> ParseAspect(std::string_view s) {
  const std::string k = Lower(s);
  if (k == "accuracy" || k == "acc") return Aspect::kAccuracy;
  if (k == "fluency" || k == "flu") return Aspect::kFluency;
  if (k == "prosody" || k == "pro" || k == "prosodic") return Aspect::kProsody;
  if (k == "completeness" || k == "com") return Aspect::kCompleteness;
  if (k == "stress" || k == "str") return Aspect::kStress;
  if (k == "total" || k == "tot" || k == "tol") return Aspect::kTotal;
  return std::nullopt;
}

const std::vector<Aspect> &AspectsOf(Granularity g) {
  static const std::vector<Aspect> sentence = {
      Aspect::kAccuracy, Aspect::kFluency, Aspect::kProsody,
      Aspect::kCompleteness, Aspect::kTotal};
  static const std::vector<Aspect> word = {Aspect::kAccuracy, Aspect::kStress,
                                           Aspect::kTotal};
  static const std::vector<Aspect> phone = {Aspect::kAccuracy};
  switch (g) {
    case Granularity::kSentence: return sentence;
    case Granularity::kWord: return word;
    case Granularity::kPhone: return phone;
  }
  return phone;
}

bool IsLegal(Granularity g, Aspect a) {
  const auto &v = AspectsOf(g);
  return std::find(v.begin(), v.end(), a) != v.end();
}

AspectScale AspectScale::Continuous(double lo, double hi) {
  AspectScale s;
  s.min = lo;
  s.max = hi;
  s.kind = Kind::kContinuous;
  return s;
}

AspectScale AspectScale::Discrete(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  AspectScale s;
  s.kind = Kind::kDiscrete;
  s.allowed = std::move(values);
  if (!s.allowed.empty()) {
    s.min = s.allowed.front();
    s.max = s.allowed.back();
  }
  return s;
}

bool AspectScale::Contains(double v) const {
  if (!std::isfinite(v)) return false;
  if (kind == Kind::kDiscrete)
    return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
  return v >= min && v <= max;
}

bool AspectScale::IsValid() const {
  if (kind == Kind::kDiscrete) return allowed.size() >= 2;
  return std::isfinite(min) && std::isfinite(max) && min < max;
}

std::string AspectScale::Describe() const {
  std::string out;
  if (kind == Kind::kDiscrete) {
    out = "{";
    for (std::size_t i = 0; i < allowed.size(); ++i) {
      if (i) out += ",";
      out += Num(allowed[i]);
    }
    return out + "}";
  }
  return "[" + Num(min) + "," + Num(max) + "]";
}

namespace scales {
const AspectScale &Score() {
  static const AspectScale s = AspectScale::Continuous(0.0, 10.0);
  return s;
}
const AspectScale &PhoneNative() {
  static const AspectScale s = AspectScale::Continuous(0.0, 2.0);
  return s;
}
const AspectScale &PhoneRescaled() {
  static const AspectScale s = AspectScale::Continuous(0.0, 10.0);
  return s;
}
const AspectScale &StressRater() {
  static const AspectScale s = AspectScale::Discrete({5.0, 10.0});
  return s;
}
const AspectScale &StressAveraged() {
  static const AspectScale s = AspectScale::Continuous(5.0, 10.0);
  return s;
}
}  // namespace scales

double RescalePhone(double native) {
  if (!scales::PhoneNative().Contains(native))
    throw ScaleError("phone score " + Num(native) + " outside native scale " +
                     scales::PhoneNative().Describe());
  return kPhoneRescaleFactor * native;
}

double UnscalePhone(double rescaled) {
  if (!scales::PhoneRescaled().Contains(rescaled))
    throw ScaleError("phone score " + Num(rescaled) +
                     " outside rescaled scale " +
                     scales::PhoneRescaled().Describe());
  return rescaled / kPhoneRescaleFactor;
}

double Clamp(double score, const AspectScale &scale) {
  if (scale.kind == AspectScale::Kind::kContinuous)
    return std::clamp(score, scale.min, scale.max);
  const auto &vals = scale.allowed;
  auto it = std::lower_bound(vals.begin(), vals.end(), score);
  if (it == vals.begin()) return vals.front();
  if (it == vals.end()) return vals.back();
  if (*it == score) return score;
  const double hi = *it;
  const double lo = *(it - 1);
  // Ties go down.
  return (hi - score) < (score - lo) ? hi : lo;
}

double RoundToTenth(double v) {
  double r = std::round(v * 10.0) / 10.0;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

double SentenceScores::Get(Aspect a) const {
  switch (a) {
    case Aspect::kAccuracy: return accuracy;
    case Aspect::kFluency: return fluency;
    case Aspect::kProsody: return prosody;
    case Aspect::kCompleteness: return completeness;
    case Aspect::kTotal: return total;
    default:
      throw InvalidArgument("scorekit", "sentence level has no aspect " +
                                            std::string(ToString(a)));
  }
}

void SentenceScores::Set(Aspect a, double v) {
  switch (a) {
    case Aspect::kAccuracy: accuracy = v; return;
    case Aspect::kFluency: fluency = v; return;
    case Aspect::kProsody: prosody = v; return;
    case Aspect::kCompleteness: completeness = v; return;
    case Aspect::kTotal: total = v; return;
    default:
      throw InvalidArgument("scorekit", "sentence level has no aspect " +
                                            std::string(ToString(a)));
  }
}

double WordScore::Get(Aspect a) const {
  switch (a) {
    case Aspect::kAccuracy: return accuracy;
    case Aspect::kStress: return stress;
    case Aspect::kTotal: return total;
    default:
      throw InvalidArgument("scorekit", "word level has no aspect " +
                                            std::string(ToString(a)));
  }
}

void WordScore::Set(Aspect a, double v) {
  switch (a) {
    case Aspect::kAccuracy: accuracy = v; return;
    case Aspect::kStress: stress = v; return;
    case Aspect::kTotal: total = v; return;
    default:
      throw InvalidArgument("scorekit", "word level has no aspect " +
                                            std::string(ToString(a)));
  }
}

double PhoneScore::On(PhoneScale target) const {
  if (target == scale) return accuracy;
  return target == PhoneScale::kRescaled ? RescalePhone(accuracy)
                                         : UnscalePhone(accuracy);
}

std::vector<Violation> ValidateAnnotation(const UtteranceAnnotation &a,
                                          StressRule stress) {
  std::vector<Violation> out;
  auto add = [&out](std::string field, std::string msg) {
    out.push_back({std::move(field), std::move(msg)});
  };
  auto check = [&](const std::string &field, double v, const AspectScale &s) {
    if (!s.Contains(v))
      add(field, "value " + Num(v) + " outside scale " + s.Describe());
  };

  if (a.utterance_id.empty()) add("utterance_id", "empty utterance id");
  for (std::size_t i = 0; i < a.reference_text.size(); ++i) {
    if (a.reference_text[i].empty() || HasWhitespace(a.reference_text[i]))
      add("reference_text[" + std::to_string(i) + "]",
          "token must be non-empty and whitespace-free");
  }

  for (Aspect asp : AspectsOf(Granularity::kSentence))
    check("sentence." + std::string(ToString(asp)), a.sentence.Get(asp),
          scales::Score());

  if (a.words.size() != a.reference_text.size())
    add("words", "word count " + std::to_string(a.words.size()) +
                     " != reference token count " +
                     std::to_string(a.reference_text.size()));

  const AspectScale &stress_scale = stress == StressRule::kRater
                                        ? scales::StressRater()
                                        : scales::StressAveraged();
  for (std::size_t i = 0; i < a.words.size(); ++i) {
    const auto &w = a.words[i];
    const std::string p = "words[" + std::to_string(i) + "]";
    if (w.word.empty() || HasWhitespace(w.word))
      add(p + ".word", "token must be non-empty and whitespace-free");
    check(p + ".accuracy", w.accuracy, scales::Score());
    check(p + ".stress", w.stress, stress_scale);
    check(p + ".total", w.total, scales::Score());
  }

  if (!a.reference_phones.empty() &&
      a.reference_phones.size() != a.reference_text.size())
    add("reference_phones", "phone group count " +
                                std::to_string(a.reference_phones.size()) +
                                " != reference token count " +
                                std::to_string(a.reference_text.size()));

  if (a.phones) {
    const auto &groups = *a.phones;
    if (groups.size() != a.words.size())
      add("phones", "phone group count " + std::to_string(groups.size()) +
                        " != word count " + std::to_string(a.words.size()));
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const std::string gp = "phones[" + std::to_string(g) + "]";
      if (g < a.reference_phones.size() &&
          groups[g].size() != a.reference_phones[g].size())
        add(gp, "phone count " + std::to_string(groups[g].size()) +
                    " != reference phone count " +
                    std::to_string(a.reference_phones[g].size()));
      for (std::size_t k = 0; k < groups[g].size(); ++k) {
        const auto &ph = groups[g][k];
        const std::string p = gp + "[" + std::to_string(k) + "]";
        if (ph.phone.empty()) add(p + ".phone", "empty phone symbol");
        check(p + ".accuracy", ph.accuracy,
              ph.scale == PhoneScale::kNative ? scales::PhoneNative()
                                              : scales::PhoneRescaled());
      }
    }
  }
  return out;
}

}  // namespace apa
