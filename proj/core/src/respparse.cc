// core/src/respparse.cc

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

#include "apa/respparse.h"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "apa/text_util.h"

namespace apa {

namespace {

constexpr std::string_view kPrefixes[] = {"Sentence Scores:", "Word Scores:",
                                          "Phone Scores:"};
constexpr Granularity kOrder[] = {Granularity::kSentence, Granularity::kWord,
                                  Granularity::kPhone};

struct Piece {
  std::string_view text;
  std::size_t column;  // 1-based, within the raw line
};

std::vector<Piece> Tokenize(std::string_view line, std::size_t offset) {
  std::vector<Piece> out;
  std::size_t i = offset;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back({line.substr(i, j - i), i + 1});
    i = j;
  }
  return out;
}

// [+-]?(digits[.digits*] | .digits)
bool IsDecimal(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t int_digits = 0, frac_digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++int_digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++frac_digits;
  }
  return i == s.size() && (int_digits + frac_digits) > 0;
}

class LineParser {
 public:
  LineParser(std::size_t line_no, std::string_view line)
      : line_no_(line_no), line_(line) {}

  [[noreturn]] void Fail(std::size_t column, std::string_view fragment,
                         const std::string &msg) const {
    throw ParseError(line_no_, column, std::string(fragment), msg);
  }

  double Score(std::string_view text, std::size_t column, std::string_view what) const {
    if (!IsDecimal(text))
      Fail(column, text, "non-numeric " + std::string(what) + " score");
    std::string_view digits = text;
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || ptr != digits.data() + digits.size())
      Fail(column, text, "non-numeric " + std::string(what) + " score");
    if (!scales::Score().Contains(v))
      Fail(column, text, std::string(what) + " score outside scale " +
                             scales::Score().Describe());
    return v;
  }

  ScoreSet Sentence(std::size_t body, const std::vector<Aspect> &aspects) const {
    const auto pieces = Tokenize(line_, body);
    if (pieces.size() != aspects.size())
      Fail(pieces.size() > aspects.size() ? pieces[aspects.size()].column : line_.size() + 1,
           pieces.size() > aspects.size() ? pieces[aspects.size()].text : line_,
           "expected " + std::to_string(aspects.size()) +
               " sentence scores, found " + std::to_string(pieces.size()));
    ScoreSet s;
    for (std::size_t i = 0; i < aspects.size(); ++i)
      s.Set(aspects[i], Score(pieces[i].text, pieces[i].column,
                              "sentence " + std::string(ToString(aspects[i]))));
    return s;
  }

  std::vector<ResponseWord> Words(std::size_t body,
                                  const std::vector<Aspect> &aspects) const {
    const auto pieces = Tokenize(line_, body);
    if (pieces.empty()) Fail(line_.size() + 1, line_, "no word fields");
    std::vector<ResponseWord> words;
    for (const Piece &p : pieces) {
      const auto parts = Split(p.text, '/');
      if (parts.size() != aspects.size() + 1)
        Fail(p.column, p.text,
             "word field needs " + std::to_string(aspects.size()) +
                 " score(s), found " + std::to_string(parts.size() - 1));
      if (parts[0].empty()) Fail(p.column, p.text, "empty word token");
      ResponseWord w;
      w.token = parts[0];
      std::size_t col = p.column + parts[0].size() + 1;
      for (std::size_t i = 0; i < aspects.size(); ++i) {
        const std::string_view frag(p.text.data() + (col - p.column), parts[i + 1].size());
        w.scores.Set(aspects[i],
                     Score(frag, col, "word " + std::string(ToString(aspects[i]))));
        col += parts[i + 1].size() + 1;
      }
      words.push_back(std::move(w));
    }
    return words;
  }

  PhoneGroups Phones(std::size_t body) const {
    const auto pieces = Tokenize(line_, body);
    if (pieces.empty()) Fail(line_.size() + 1, line_, "no phone fields");
    PhoneGroups groups(1);
    for (const Piece &p : pieces) {
      if (p.text == "-") {
        if (groups.back().empty()) Fail(p.column, p.text, "empty phone group");
        groups.emplace_back();
        continue;
      }
      const auto slash = p.text.find('/');
      if (slash == std::string_view::npos || p.text.find('/', slash + 1) != std::string_view::npos)
        Fail(p.column, p.text, "phone field must be phone/score");
      if (slash == 0) Fail(p.column, p.text, "empty phone symbol");
      const std::string_view num = p.text.substr(slash + 1);
      groups.back().push_back(
          {std::string(p.text.substr(0, slash)), Score(num, p.column + slash + 1, "phone")});
    }
    if (groups.back().empty())
      Fail(pieces.back().column, pieces.back().text, "empty phone group");
    return groups;
  }

 private:
  std::size_t line_no_;
  std::string_view line_;
};

int SectionOf(std::string_view trimmed) {
  for (int i = 0; i < 3; ++i)
    if (trimmed.substr(0, kPrefixes[i].size()) == kPrefixes[i]) return i;
  return -1;
}

std::string Scores(const ScoreSet &s, const std::vector<Aspect> &aspects,
                   std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < aspects.size(); ++i) {
    if (i) out += sep;
    out += FormatFixed(s.Get(aspects[i]), 1);
  }
  return out;
}

}  // namespace

double ScoreSet::Get(Aspect a) const {
  const auto &v = v_[Index(a)];
  if (!v)
    throw InvalidArgument("respparse", "score set has no " +
                                           std::string(ToString(a)) + " score");
  return *v;
}

std::vector<Aspect> ScoreSet::Present() const {
  std::vector<Aspect> out;
  for (std::size_t i = 0; i < kAspectCount; ++i)
    if (v_[i]) out.push_back(static_cast<Aspect>(i));
  return out;
}

AssessmentResponse FromAnnotation(const UtteranceAnnotation &a,
                                  const TaskSpec &task) {
  AssessmentResponse r;
  if (task.Has(Granularity::kSentence)) {
    ScoreSet s;
    for (Aspect asp : task.Aspects(Granularity::kSentence))
      s.Set(asp, a.sentence.Get(asp));
    r.sentence = s;
  }
  if (task.Has(Granularity::kWord)) {
    std::vector<ResponseWord> words;
    for (const WordScore &w : a.words) {
      ResponseWord rw{w.word, {}};
      for (Aspect asp : task.Aspects(Granularity::kWord))
        rw.scores.Set(asp, w.Get(asp));
      words.push_back(std::move(rw));
    }
    r.words = std::move(words);
  }
  if (task.Has(Granularity::kPhone)) {
    if (!a.phones)
      throw InvalidArgument("respparse", "utterance " + a.utterance_id +
                                             " has no phone scores");
    PhoneGroups groups;
    for (const auto &g : *a.phones) {
      std::vector<ResponsePhone> rg;
      for (const PhoneScore &p : g)
        rg.push_back({p.phone, p.On(PhoneScale::kRescaled)});
      groups.push_back(std::move(rg));
    }
    r.phones = std::move(groups);
  }
  return r;
}

ParseError::ParseError(std::size_t line, std::size_t column,
                       std::string fragment, const std::string &message)
    : Error("respparse", "line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + message +
                             " near '" + fragment.substr(0, 40) + "'"),
      line_(line),
      column_(column),
      fragment_(std::move(fragment)),
      detail_(message) {}

ParseResult Parse(std::string_view raw, const TaskSpec &task, ParseMode mode) {
  if (task.empty()) throw InvalidArgument("respparse", "empty task spec");
  ParseResult result;
  const bool strict = mode == ParseMode::kStrict;
  auto lines = Split(raw, '\n');
  for (auto &l : lines)
    if (!l.empty() && l.back() == '\r') l.pop_back();

  bool seen[3] = {false, false, false};
  int last_section = -1;
  std::size_t last_line = 1;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string_view line = lines[li];
    const std::size_t line_no = li + 1;
    const std::string_view trimmed = Trim(line);
    if (trimmed.empty()) continue;
    last_line = line_no;
    const std::size_t indent = static_cast<std::size_t>(trimmed.data() - line.data());
    const int section = SectionOf(trimmed);
    auto flag = [&](const std::string &msg) {
      if (strict) throw ParseError(line_no, indent + 1, std::string(trimmed), msg);
      result.warnings.push_back({line_no, indent + 1, msg});
    };
    if (section < 0) {
      flag(last_section < 0 ? "unexpected text before the first section"
                            : "unexpected text after the " +
                                  std::string(kPrefixes[last_section]) + " section");
      continue;
    }
    const Granularity g = kOrder[section];
    if (!task.Has(g)) {
      flag("section " + std::string(kPrefixes[section]) + " not requested by the task");
      continue;
    }
    if (seen[section]) {
      flag("duplicate section " + std::string(kPrefixes[section]));
      continue;
    }
    if (section < last_section) {
      if (strict)
        throw ParseError(line_no, indent + 1, std::string(trimmed),
                         "section " + std::string(kPrefixes[section]) + " out of order");
      result.warnings.push_back({line_no, indent + 1, "section out of order"});
    }
    seen[section] = true;
    last_section = std::max(last_section, section);

    LineParser lp(line_no, line);
    const std::size_t body = indent + kPrefixes[section].size();
    switch (g) {
      case Granularity::kSentence:
        result.response.sentence = lp.Sentence(body, task.Aspects(g));
        break;
      case Granularity::kWord:
        result.response.words = lp.Words(body, task.Aspects(g));
        break;
      case Granularity::kPhone:
        result.response.phones = lp.Phones(body);
        break;
    }
  }

  for (int s = 0; s < 3; ++s) {
    if (task.Has(kOrder[s]) && !seen[s]) {
      const std::string_view last = lines.empty() ? std::string_view() : std::string_view(lines[last_line - 1]);
      throw ParseError(last_line, 1, std::string(last.substr(0, 40)),
                       "missing section " + std::string(kPrefixes[s]));
    }
  }
  return result;
}

std::string Serialize(const AssessmentResponse &r, const TaskSpec &task) {
  auto mismatch = [](const std::string &what) {
    throw InvalidArgument("respparse", "response does not match task: " + what);
  };
  std::vector<std::string> lines;
  for (Granularity g : kOrder) {
    const bool present = g == Granularity::kSentence ? r.sentence.has_value()
                         : g == Granularity::kWord   ? r.words.has_value()
                                                     : r.phones.has_value();
    if (present != task.Has(g))
      mismatch(std::string(ToString(g)) +
               (present ? " section not requested" : " section missing"));
  }
  if (r.sentence) {
    const auto &aspects = task.Aspects(Granularity::kSentence);
    if (r.sentence->Present() != aspects) mismatch("sentence aspects differ");
    lines.push_back("Sentence Scores: " + Scores(*r.sentence, aspects, " "));
  }
  if (r.words) {
    const auto &aspects = task.Aspects(Granularity::kWord);
    if (r.words->empty()) mismatch("word section is empty");
    std::vector<std::string> fields;
    for (const ResponseWord &w : *r.words) {
      if (w.scores.Present() != aspects) mismatch("word aspects differ for '" + w.token + "'");
      if (w.token.empty() || SplitWhitespace(w.token).size() != 1 ||
          w.token.find('/') != std::string::npos)
        mismatch("malformed word token '" + w.token + "'");
      fields.push_back(w.token + "/" + Scores(w.scores, aspects, "/"));
    }
    lines.push_back("Word Scores: " + Join(fields, " "));
  }
  if (r.phones) {
    if (r.phones->empty()) mismatch("phone section is empty");
    std::vector<std::string> groups;
    for (const auto &g : *r.phones) {
      if (g.empty()) mismatch("empty phone group");
      std::vector<std::string> fields;
      for (const ResponsePhone &p : g) {
        if (p.symbol.empty() || p.symbol == "-" || SplitWhitespace(p.symbol).size() != 1 ||
            p.symbol.find('/') != std::string::npos)
          mismatch("malformed phone symbol '" + p.symbol + "'");
        fields.push_back(p.symbol + "/" + FormatFixed(p.accuracy, 1));
      }
      groups.push_back(Join(fields, " "));
    }
    lines.push_back("Phone Scores: " + Join(groups, " - "));
  }
  return Join(lines, "\n");
}

AlignmentReport Align(const AssessmentResponse &r, const UtteranceAnnotation &a) {
  AlignmentReport rep;
  if (r.words) {
    rep.expected_words = a.reference_text.size();
    rep.got_words = r.words->size();
    const std::size_t n = std::max(rep.expected_words, rep.got_words);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string exp = i < rep.expected_words ? a.reference_text[i] : "";
      const std::string got = i < rep.got_words ? (*r.words)[i].token : "";
      if (exp.empty() || got.empty() || NormalizeToken(exp) != NormalizeToken(got))
        rep.word_mismatches.push_back({i, exp, got});
    }
  }
  if (r.phones) {
    rep.expected_phone_groups = a.reference_phones.size();
    rep.got_phone_groups = r.phones->size();
    const std::size_t groups = std::max(rep.expected_phone_groups, rep.got_phone_groups);
    std::size_t pos = 0;
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t ne = g < rep.expected_phone_groups ? a.reference_phones[g].size() : 0;
      const std::size_t ng = g < rep.got_phone_groups ? (*r.phones)[g].size() : 0;
      for (std::size_t k = 0; k < std::max(ne, ng); ++k, ++pos) {
        const std::string exp = k < ne ? a.reference_phones[g][k] : "";
        const std::string got = k < ng ? (*r.phones)[g][k].symbol : "";
        if (exp.empty() || got.empty() || ToLower(exp) != ToLower(got))
          rep.phone_mismatches.push_back({pos, exp, got});
      }
    }
  }
  return rep;
}

}  // namespace apa
