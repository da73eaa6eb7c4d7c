// core/include/apa/scorekit.h

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

#ifndef APA_SCOREKIT_H_
#define APA_SCOREKIT_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apa {

enum class Granularity { kSentence, kWord, kPhone };

enum class Aspect { kAccuracy, kFluency, kProsody, kCompleteness, kStress, kTotal };

inline constexpr std::size_t kAspectCount = 6;

std::string_view ToString(Granularity g);
std::string_view ToString(Aspect a);
// Accepts full names ("accuracy") and the short forms used in prompt
// stanzas ("acc", "flu", "pro", "com", "str", "tot").
std::optional<Granularity> ParseGranularity(std::string_view s);
std::optional<Aspect> ParseAspect(std::string_view s);

// Aspects scored at each granularity, in canonical output order.
const std::vector<Aspect> &AspectsOf(Granularity g);
bool IsLegal(Granularity g, Aspect a);

// Numeric range a score lives on. Discrete scales only admit the listed
// values; min/max are their extremes.
struct AspectScale {
  enum class Kind { kContinuous, kDiscrete };

  double min = 0.0;
  double max = 10.0;
  Kind kind = Kind::kContinuous;
  std::vector<double> allowed;  // sorted ascending, only for kDiscrete

  static AspectScale Continuous(double lo, double hi);
  static AspectScale Discrete(std::vector<double> values);

  bool Contains(double v) const;
  bool IsValid() const;
  std::string Describe() const;  // "[0,10]" or "{5,10}"
};

namespace scales {
// Sentence and word aspects.
const AspectScale &Score();
// Phone accuracy as annotated.
const AspectScale &PhoneNative();
// Phone accuracy after rescaling onto the common 0..10 range.
const AspectScale &PhoneRescaled();
// A single rater's word stress judgement.
const AspectScale &StressRater();
// Word stress averaged over raters.
const AspectScale &StressAveraged();
}  // namespace scales

// Phone accuracy scale tag carried alongside each phone score.
enum class PhoneScale { kNative, kRescaled };

inline constexpr double kPhoneRescaleFactor = 5.0;

// Maps a native [0,2] phone score onto [0,10]. Throws ScaleError outside
// the native range.
double RescalePhone(double native);
// Inverse of RescalePhone. Throws ScaleError outside [0,10].
double UnscalePhone(double rescaled);

// Projects `score` onto `scale`. Discrete scales snap to the nearest
// allowed value; an exact midpoint goes to the lower neighbour.
double Clamp(double score, const AspectScale &scale);

// Rounds to one decimal place, half away from zero.
double RoundToTenth(double v);

struct SentenceScores {
  double accuracy = 0.0;
  double fluency = 0.0;
  double prosody = 0.0;
  double completeness = 0.0;
  double total = 0.0;

  double Get(Aspect a) const;
  void Set(Aspect a, double v);
  bool operator==(const SentenceScores &) const = default;
};

struct WordScore {
  std::string word;
  double accuracy = 0.0;
  double stress = 10.0;
  double total = 0.0;

  double Get(Aspect a) const;
  void Set(Aspect a, double v);
  bool operator==(const WordScore &) const = default;
};

struct PhoneScore {
  std::string phone;
  double accuracy = 0.0;
  PhoneScale scale = PhoneScale::kRescaled;

  // Score expressed on the requested scale.
  double On(PhoneScale target) const;
  bool operator==(const PhoneScore &) const = default;
};

struct UtteranceAnnotation {
  std::string utterance_id;
  std::string speaker_id;
  std::vector<std::string> reference_text;
  // One phone list per reference token; empty when the corpus has none.
  std::vector<std::vector<std::string>> reference_phones;
  SentenceScores sentence;
  std::vector<WordScore> words;
  // Grouped by word; absent for corpora without phone labels.
  std::optional<std::vector<std::vector<PhoneScore>>> phones;
  // Passed through untouched from the source corpus.
  std::string audio_path;

  bool HasPhones() const { return phones.has_value(); }
  bool operator==(const UtteranceAnnotation &) const = default;
};

// Which stress scale applies: single-rater gold uses {5,10}; five-rater
// averages can land anywhere in [5,10].
enum class StressRule { kRater, kAveraged };

struct Violation {
  std::string field;    // e.g. "words[2].stress"
  std::string message;
  bool operator==(const Violation &) const = default;
};

// Checks every structural and scale invariant of an annotation. An empty
// result means the annotation is valid.
std::vector<Violation> ValidateAnnotation(const UtteranceAnnotation &a,
                                          StressRule stress = StressRule::kRater);

}  // namespace apa

#endif  // APA_SCOREKIT_H_
