// core/include/apa/respparse.h

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

#ifndef APA_RESPPARSE_H_
#define APA_RESPPARSE_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apa/error.h"
#include "apa/scorekit.h"
#include "apa/task_spec.h"

namespace apa {

// A sparse set of aspect scores; only the aspects a task asked for are set.
class ScoreSet {
 public:
  bool Has(Aspect a) const { return v_[Index(a)].has_value(); }
  double Get(Aspect a) const;  // throws InvalidArgument when absent
  void Set(Aspect a, double value) { v_[Index(a)] = value; }
  std::vector<Aspect> Present() const;
  bool operator==(const ScoreSet &) const = default;

 private:
  static std::size_t Index(Aspect a) { return static_cast<std::size_t>(a); }
  std::array<std::optional<double>, kAspectCount> v_;
};

struct ResponseWord {
  std::string token;
  ScoreSet scores;
  bool operator==(const ResponseWord &) const = default;
};

struct ResponsePhone {
  std::string symbol;
  double accuracy = 0.0;  // on the rescaled [0,10] scale
  bool operator==(const ResponsePhone &) const = default;
};

using PhoneGroups = std::vector<std::vector<ResponsePhone>>;

struct AssessmentResponse {
  std::optional<ScoreSet> sentence;
  std::optional<std::vector<ResponseWord>> words;
  std::optional<PhoneGroups> phones;

  bool empty() const { return !sentence && !words && !phones; }
  bool operator==(const AssessmentResponse &) const = default;
};

// The gold response an ideal model would emit for `a` under `task`.
AssessmentResponse FromAnnotation(const UtteranceAnnotation &a,
                                  const TaskSpec &task);

enum class ParseMode { kStrict, kLenient };

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::string fragment,
             const std::string &message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string &fragment() const { return fragment_; }
  const std::string &detail() const { return detail_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string fragment_;
  std::string detail_;
};

struct ParseWarning {
  std::size_t line = 0;
  std::size_t column = 0;
  std::string message;
};

struct ParseResult {
  AssessmentResponse response;
  std::vector<ParseWarning> warnings;
};

// Parses model output against the sections and aspects `task` asks for.
// Lines and columns are 1-based. Throws ParseError.
ParseResult Parse(std::string_view raw, const TaskSpec &task,
                  ParseMode mode = ParseMode::kStrict);

// Canonical text form, one decimal per score. Throws InvalidArgument when
// the response does not carry exactly the sections and aspects of `task`.
std::string Serialize(const AssessmentResponse &r, const TaskSpec &task);

struct TokenMismatch {
  std::size_t position = 0;
  std::string expected;  // empty when the response has extra items
  std::string got;       // empty when the response is short
  bool operator==(const TokenMismatch &) const = default;
};

struct AlignmentReport {
  std::size_t expected_words = 0;
  std::size_t got_words = 0;
  std::size_t expected_phone_groups = 0;
  std::size_t got_phone_groups = 0;
  std::vector<TokenMismatch> word_mismatches;
  std::vector<TokenMismatch> phone_mismatches;  // flattened positions

  bool CountsMatch() const {
    return expected_words == got_words &&
           expected_phone_groups == got_phone_groups;
  }
  bool empty() const {
    return CountsMatch() && word_mismatches.empty() && phone_mismatches.empty();
  }
};

// Compares words and phones of `r` against the reference of `a`. Tokens
// match case-insensitively with surrounding punctuation ignored.
AlignmentReport Align(const AssessmentResponse &r, const UtteranceAnnotation &a);

}  // namespace apa

#endif  // APA_RESPPARSE_H_
