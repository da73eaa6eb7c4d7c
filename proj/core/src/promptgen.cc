// core/src/promptgen.cc

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

#include "apa/promptgen.h"

#include <cctype>
#include <fstream>
#include <sstream>

#include "apa/error.h"
#include "apa/text_util.h"

namespace apa {

namespace {

// Frozen wording of apa-prompt-v1. Changing any of these strings requires a
// new template version.
constexpr std::string_view kRole =
    "You are a pronunciation evaluation teacher who analyzes speech at ";
constexpr std::string_view kSentenceIntro =
    "At the sentence level, the evaluation includes ";
constexpr std::string_view kSentenceAccuracy =
    "accuracy reflects phone-level pronunciation, accent, and clarity";
constexpr std::string_view kSentenceFluency =
    "fluency considers pauses, repetitions, and stammering";
constexpr std::string_view kSentenceProsody =
    "prosody assesses intonation, speed, and rhythm";
constexpr std::string_view kSentenceCompleteness =
    "completeness indicates the percentage of words from the target text that "
    "were actually pronounced correctly";
constexpr std::string_view kSentenceTotal =
    "The total score is a comprehensive measure that reflects all aspects of "
    "speech.";
constexpr std::string_view kWordIntro = "At the word level, the evaluation includes ";
constexpr std::string_view kWordAccuracy =
    "considers phone pronunciation, accent, and clarity";
constexpr std::string_view kWordStress =
    "the stress score reflects the correctness of stress placement, where a "
    "score of 10 indicates correct stress and 5 indicates incorrect stress";
constexpr std::string_view kPhoneIntro =
    "At phone level, we assess the goodness of each phoneme with in the words.";
constexpr std::string_view kRange =
    "All scores range from 0 to 10, with 0 representing the poorest "
    "pronunciation and 10 representing the best";
constexpr std::string_view kRangeStressException =
    ", except for the word-level stress score, which is either 5 or 10";
constexpr std::string_view kStressOnlyRange =
    "The word-level stress score is either 5 or 10.";
constexpr std::string_view kRequest = "Please evaluate the provided audio at the ";
constexpr std::string_view kBoundaryNote =
    "In the phone sequence, '-' indicates word boundaries.";
constexpr std::string_view kFormatIntro =
    "The final output format should be structured as follows:";

constexpr std::string_view kSentencePrefix = "Sentence Scores:";
constexpr std::string_view kWordPrefix = "Word Scores:";
constexpr std::string_view kPhonePrefix = "Phone Scores:";

std::string Abbrev(Aspect a) {
  switch (a) {
    case Aspect::kAccuracy: return "Acc";
    case Aspect::kFluency: return "Flu";
    case Aspect::kProsody: return "Pro";
    case Aspect::kCompleteness: return "Com";
    case Aspect::kStress: return "Str";
    case Aspect::kTotal: return "Tot";
  }
  return "?";
}

std::string Capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

// "a", "a and b", "a, b, and c"
std::string JoinSerial(const std::vector<std::string> &items) {
  if (items.size() == 1) return items[0];
  if (items.size() == 2) return items[0] + " and " + items[1];
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i + 1 == items.size()) out += "and ";
    out += items[i];
    if (i + 1 < items.size()) out += ", ";
  }
  return out;
}

// "a", "a and b", "a, b and c" (no serial comma)
std::string JoinPlain(const std::vector<std::string> &items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? " and " : ", ";
    out += items[i];
  }
  return out;
}

// "a", "a; and b", "a; b; and c"
std::string JoinClauses(const std::vector<std::string> &items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? "; and " : "; ";
    out += items[i];
  }
  return out;
}

std::string AspectListing(const std::vector<Aspect> &aspects) {
  std::vector<std::string> names;
  for (Aspect a : aspects)
    names.push_back(a == Aspect::kTotal ? "a total score"
                                        : std::string(ToString(a)));
  return JoinSerial(names);
}

std::vector<std::string> Levels(const TaskSpec &task) {
  std::vector<std::string> levels;
  for (Granularity g :
       {Granularity::kSentence, Granularity::kWord, Granularity::kPhone})
    if (task.Has(g)) levels.emplace_back(ToString(g));
  return levels;
}

std::string FormatLine(Granularity g, const std::vector<Aspect> &aspects) {
  if (g == Granularity::kSentence) {
    std::string line(kSentencePrefix);
    for (Aspect a : aspects) line += " {" + Abbrev(a) + "}";
    return line;
  }
  std::string fields;
  for (Aspect a : aspects) fields += "/{" + Abbrev(a) + "}";
  if (g == Granularity::kWord)
    return std::string(kWordPrefix) + " {W1}" + fields + " {W2}" + fields + " ...";
  return std::string(kPhonePrefix) + " {P1}" + fields + " {P2}" + fields +
         " - {P3}" + fields + " ...";
}

std::string RubricParagraph(const TaskSpec &task) {
  std::vector<std::string> sentences;
  const auto levels = Levels(task);
  sentences.push_back(std::string(kRole) + JoinPlain(levels) +
                      (levels.size() > 1 ? " levels." : " level."));

  const auto &sent = task.Aspects(Granularity::kSentence);
  if (!sent.empty()) {
    sentences.push_back(std::string(kSentenceIntro) + AspectListing(sent) + ".");
    std::vector<std::string> clauses;
    if (task.Has(Granularity::kSentence, Aspect::kAccuracy))
      clauses.emplace_back(kSentenceAccuracy);
    if (task.Has(Granularity::kSentence, Aspect::kFluency))
      clauses.emplace_back(kSentenceFluency);
    if (task.Has(Granularity::kSentence, Aspect::kProsody))
      clauses.emplace_back(kSentenceProsody);
    if (task.Has(Granularity::kSentence, Aspect::kCompleteness))
      clauses.emplace_back(kSentenceCompleteness);
    if (!clauses.empty()) sentences.push_back(Capitalize(JoinClauses(clauses)) + ".");
    if (task.Has(Granularity::kSentence, Aspect::kTotal))
      sentences.emplace_back(kSentenceTotal);
  }

  const auto &word = task.Aspects(Granularity::kWord);
  if (!word.empty()) {
    sentences.push_back(std::string(kWordIntro) + AspectListing(word) + ".");
    std::vector<std::string> clauses;
    if (task.Has(Granularity::kWord, Aspect::kAccuracy)) {
      const bool again = task.Has(Granularity::kSentence, Aspect::kAccuracy);
      clauses.push_back(std::string(again ? "accuracy again " : "accuracy ") +
                        std::string(kWordAccuracy));
    }
    if (task.Has(Granularity::kWord, Aspect::kStress))
      clauses.emplace_back(kWordStress);
    if (!clauses.empty())
      sentences.push_back(Capitalize(Join(clauses, ", while ")) + ".");
  }

  if (task.Has(Granularity::kPhone)) sentences.emplace_back(kPhoneIntro);

  const bool stress = task.Has(Granularity::kWord, Aspect::kStress);
  const bool stress_only = stress && sent.empty() && word.size() == 1 &&
                           !task.Has(Granularity::kPhone);
  if (stress_only)
    sentences.emplace_back(kStressOnlyRange);
  else
    sentences.push_back(std::string(kRange) +
                        (stress ? std::string(kRangeStressException) : "") + ".");
  return Join(sentences, " ");
}

std::string RequestLine(const TaskSpec &task) {
  const auto levels = Levels(task);
  const bool phones = task.Has(Granularity::kPhone);
  return std::string(kRequest) + JoinSerial(levels) +
         (levels.size() > 1 ? " levels" : " level") + " using the given " +
         (phones ? "reference text and phone sequence." : "reference text.");
}

bool StartsWith(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

void ReplaceAll(std::string &s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

PromptTemplate BuildTemplate(const TaskSpec &task) {
  if (task.empty()) throw InvalidArgument("promptgen", "empty task spec");
  std::vector<std::string> lines;
  lines.push_back(RubricParagraph(task));
  lines.push_back(RequestLine(task));
  lines.push_back("Reference text: " + std::string(kReferenceTextMarker) + ".");
  if (task.Has(Granularity::kPhone)) {
    lines.push_back("Reference phone sequence: " +
                    std::string(kReferencePhoneMarker) + ".");
    lines.push_back(std::string(kBoundaryNote) + " " + std::string(kFormatIntro));
  } else {
    lines.emplace_back(kFormatIntro);
  }
  for (Granularity g :
       {Granularity::kSentence, Granularity::kWord, Granularity::kPhone})
    if (task.Has(g)) lines.push_back(FormatLine(g, task.Aspects(g)));
  return {std::string(kPromptTemplateVersion), Join(lines, "\n")};
}

PromptTemplate LoadTemplate(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("promptgen", "cannot open template " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::string body = ss.str();
  PromptTemplate t;
  if (StartsWith(body, "#version ")) {
    const auto nl = body.find('\n');
    t.version = std::string(Trim(body.substr(9, nl == std::string::npos
                                                    ? std::string::npos
                                                    : nl - 9)));
    body = nl == std::string::npos ? std::string() : body.substr(nl + 1);
  }
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r'))
    body.pop_back();
  if (body.find(kReferenceTextMarker) == std::string::npos)
    throw Error("promptgen", "template " + path.string() + " lacks " +
                                 std::string(kReferenceTextMarker));
  t.text = std::move(body);
  return t;
}

void SaveTemplate(const PromptTemplate &tmpl, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("promptgen", "cannot write template " + path.string());
  out << "#version " << tmpl.version << "\n" << tmpl.text << "\n";
}

RenderedPrompt Render(const PromptTemplate &tmpl, const UtteranceAnnotation &a,
                      const TaskSpec &task) {
  RenderedPrompt p;
  p.template_version = tmpl.version;
  p.reference_text = Join(a.reference_text, " ");
  const bool wants_phones =
      task.Has(Granularity::kPhone) ||
      tmpl.text.find(kReferencePhoneMarker) != std::string::npos;
  if (wants_phones) {
    if (a.reference_phones.empty())
      throw InvalidArgument("promptgen", "utterance " + a.utterance_id +
                                             " has no reference phones for a "
                                             "phone-level task");
    p.reference_phones = PhoneSequenceString(a.reference_phones);
  }
  std::string text = tmpl.text;
  ReplaceAll(text, kReferenceTextMarker, p.reference_text);
  ReplaceAll(text, kReferencePhoneMarker, p.reference_phones);
  p.text = text;

  std::vector<std::string> instruction;
  bool in_refs = false;
  for (const std::string &line : Split(text, '\n')) {
    if (StartsWith(line, kSentencePrefix) || StartsWith(line, kWordPrefix) ||
        StartsWith(line, kPhonePrefix)) {
      p.format_stanza.push_back(line);
    } else if (StartsWith(line, "Reference ")) {
      in_refs = true;
    } else if (!in_refs) {
      instruction.push_back(line);
    }
  }
  p.instruction = Join(instruction, "\n");
  return p;
}

RenderedPrompt Render(const UtteranceAnnotation &a, const TaskSpec &task) {
  return Render(BuildTemplate(task), a, task);
}

std::string PhoneSequenceString(
    const std::vector<std::vector<std::string>> &groups) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].empty())
      throw InvalidArgument("promptgen",
                            "phone group " + std::to_string(i) + " is empty");
    parts.push_back(Join(groups[i], " "));
  }
  return Join(parts, " - ");
}

std::vector<std::vector<std::string>> SplitPhoneSequence(std::string_view s) {
  std::vector<std::vector<std::string>> groups(1);
  for (std::string &tok : SplitWhitespace(s)) {
    if (tok == "-") {
      if (groups.back().empty())
        throw InvalidArgument("promptgen", "empty phone group in '" +
                                               std::string(s) + "'");
      groups.emplace_back();
    } else {
      groups.back().push_back(std::move(tok));
    }
  }
  if (groups.back().empty())
    throw InvalidArgument("promptgen",
                          "empty phone group in '" + std::string(s) + "'");
  return groups;
}

}  // namespace apa
