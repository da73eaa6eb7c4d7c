// core/src/json_io.cc

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

#include "apa/json_io.h"

#include "apa/error.h"

namespace apa {

namespace {

[[noreturn]] void SchemaFail(const std::string &id, const std::string &field,
                             const std::string &what) {
  throw Error("corpus", "utterance '" + id + "': field '" + field + "' " + what);
}

const Json &Field(const Json &obj, const std::string &id, const std::string &key) {
  if (!obj.is_object()) SchemaFail(id, key, "parent is not an object");
  auto it = obj.find(key);
  if (it == obj.end()) SchemaFail(id, key, "is missing");
  return *it;
}

double Number(const Json &obj, const std::string &id, const std::string &key) {
  const Json &v = Field(obj, id, key);
  if (!v.is_number()) SchemaFail(id, key, "is not a number");
  return v.get<double>();
}

std::string String(const Json &obj, const std::string &id, const std::string &key) {
  const Json &v = Field(obj, id, key);
  if (!v.is_string()) SchemaFail(id, key, "is not a string");
  return v.get<std::string>();
}

std::vector<std::string> StringList(const Json &v, const std::string &id,
                                    const std::string &key) {
  if (!v.is_array()) SchemaFail(id, key, "is not an array");
  std::vector<std::string> out;
  for (const Json &e : v) {
    if (!e.is_string()) SchemaFail(id, key, "holds a non-string");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

Json MakeHeader(std::string_view kind, std::optional<std::uint64_t> seed) {
  Json h = {{"tool", kToolName}, {"version", kToolVersion}, {"kind", kind}};
  if (seed) h["seed"] = *seed;
  return Json{{std::string(kHeaderKey), h}};
}

bool IsHeader(const Json &j) {
  return j.is_object() && j.size() == 1 && j.contains(std::string(kHeaderKey));
}

Json ToJson(const UtteranceAnnotation &a) {
  Json j;
  j["utterance_id"] = a.utterance_id;
  j["speaker_id"] = a.speaker_id;
  j["reference_text"] = a.reference_text;
  j["reference_phones"] = a.reference_phones;
  j["sentence"] = {{"accuracy", a.sentence.accuracy},
                   {"fluency", a.sentence.fluency},
                   {"prosody", a.sentence.prosody},
                   {"completeness", a.sentence.completeness},
                   {"total", a.sentence.total}};
  Json words = Json::array();
  for (const WordScore &w : a.words)
    words.push_back({{"word", w.word},
                     {"accuracy", w.accuracy},
                     {"stress", w.stress},
                     {"total", w.total}});
  j["words"] = std::move(words);
  if (a.phones) {
    Json groups = Json::array();
    for (const auto &g : *a.phones) {
      Json jg = Json::array();
      for (const PhoneScore &p : g) {
        Json jp = {{"phone", p.phone},
                   {"accuracy", p.accuracy},
                   {"scale", p.scale == PhoneScale::kNative ? "native" : "rescaled"}};
        if (p.scale == PhoneScale::kRescaled)
          jp["native_accuracy"] = p.accuracy / kPhoneRescaleFactor;
        jg.push_back(std::move(jp));
      }
      groups.push_back(std::move(jg));
    }
    j["phones"] = std::move(groups);
  }
  if (!a.audio_path.empty()) j["audio_path"] = a.audio_path;
  return j;
}

UtteranceAnnotation AnnotationFromJson(const Json &j) {
  UtteranceAnnotation a;
  if (!j.is_object()) throw Error("corpus", "annotation record is not an object");
  a.utterance_id = String(j, "?", "utterance_id");
  const std::string &id = a.utterance_id;
  if (j.contains("speaker_id")) a.speaker_id = String(j, id, "speaker_id");
  a.reference_text = StringList(Field(j, id, "reference_text"), id, "reference_text");
  if (j.contains("reference_phones")) {
    const Json &rp = j["reference_phones"];
    if (!rp.is_array()) SchemaFail(id, "reference_phones", "is not an array");
    for (const Json &g : rp) a.reference_phones.push_back(StringList(g, id, "reference_phones"));
  }
  const Json &s = Field(j, id, "sentence");
  for (Aspect asp : AspectsOf(Granularity::kSentence))
    a.sentence.Set(asp, Number(s, id, std::string(ToString(asp))));
  const Json &words = Field(j, id, "words");
  if (!words.is_array()) SchemaFail(id, "words", "is not an array");
  for (const Json &w : words) {
    WordScore ws;
    ws.word = String(w, id, "word");
    ws.accuracy = Number(w, id, "accuracy");
    ws.stress = Number(w, id, "stress");
    ws.total = Number(w, id, "total");
    a.words.push_back(std::move(ws));
  }
  if (j.contains("phones") && !j["phones"].is_null()) {
    const Json &groups = j["phones"];
    if (!groups.is_array()) SchemaFail(id, "phones", "is not an array");
    std::vector<std::vector<PhoneScore>> out;
    for (const Json &g : groups) {
      if (!g.is_array()) SchemaFail(id, "phones", "group is not an array");
      std::vector<PhoneScore> og;
      for (const Json &p : g) {
        PhoneScore ps;
        ps.phone = String(p, id, "phone");
        ps.accuracy = Number(p, id, "accuracy");
        ps.scale = PhoneScale::kRescaled;
        if (p.contains("scale")) {
          const std::string sc = String(p, id, "scale");
          if (sc == "native") ps.scale = PhoneScale::kNative;
          else if (sc != "rescaled") SchemaFail(id, "scale", "must be native or rescaled");
        }
        og.push_back(std::move(ps));
      }
      out.push_back(std::move(og));
    }
    a.phones = std::move(out);
  }
  if (j.contains("audio_path")) a.audio_path = String(j, id, "audio_path");
  return a;
}

Json ToJson(const AssessmentResponse &r) {
  Json j = Json::object();
  auto scores = [](const ScoreSet &s, Json &into) {
    for (Aspect a : s.Present()) into[std::string(ToString(a))] = s.Get(a);
  };
  if (r.sentence) {
    Json s = Json::object();
    scores(*r.sentence, s);
    j["sentence"] = std::move(s);
  }
  if (r.words) {
    Json words = Json::array();
    for (const ResponseWord &w : *r.words) {
      Json jw = {{"word", w.token}};
      scores(w.scores, jw);
      words.push_back(std::move(jw));
    }
    j["words"] = std::move(words);
  }
  if (r.phones) {
    Json groups = Json::array();
    for (const auto &g : *r.phones) {
      Json jg = Json::array();
      for (const ResponsePhone &p : g)
        jg.push_back({{"phone", p.symbol}, {"accuracy", p.accuracy}});
      groups.push_back(std::move(jg));
    }
    j["phones"] = std::move(groups);
  }
  return j;
}

AssessmentResponse ResponseFromJson(const Json &j) {
  const std::string id = j.is_object() && j.contains("utterance_id") &&
                                 j["utterance_id"].is_string()
                             ? j["utterance_id"].get<std::string>()
                             : "?";
  auto scores = [&id](const Json &obj, Granularity g) {
    ScoreSet s;
    for (Aspect a : AspectsOf(g)) {
      const std::string key(ToString(a));
      if (obj.contains(key)) s.Set(a, Number(obj, id, key));
    }
    return s;
  };
  AssessmentResponse r;
  if (!j.is_object()) throw Error("respparse", "response record is not an object");
  if (j.contains("sentence")) r.sentence = scores(j["sentence"], Granularity::kSentence);
  if (j.contains("words")) {
    const Json &words = j["words"];
    if (!words.is_array()) SchemaFail(id, "words", "is not an array");
    std::vector<ResponseWord> out;
    for (const Json &w : words)
      out.push_back({String(w, id, "word"), scores(w, Granularity::kWord)});
    r.words = std::move(out);
  }
  if (j.contains("phones")) {
    const Json &groups = j["phones"];
    if (!groups.is_array()) SchemaFail(id, "phones", "is not an array");
    PhoneGroups out;
    for (const Json &g : groups) {
      if (!g.is_array()) SchemaFail(id, "phones", "group is not an array");
      std::vector<ResponsePhone> og;
      for (const Json &p : g) og.push_back({String(p, id, "phone"), Number(p, id, "accuracy")});
      out.push_back(std::move(og));
    }
    r.phones = std::move(out);
  }
  return r;
}

JsonLinesWriter::JsonLinesWriter(const std::filesystem::path &path,
                                 std::string_view kind,
                                 std::optional<std::uint64_t> seed)
    : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error("io", "cannot write " + path.string());
  out_ << MakeHeader(kind, seed).dump() + "\n";
  out_.flush();
}

JsonLinesWriter JsonLinesWriter::Append(const std::filesystem::path &path,
                                        std::string_view kind) {
  const bool fresh = !std::filesystem::exists(path) ||
                     std::filesystem::file_size(path) == 0;
  // A crash mid-line leaves no trailing newline; start a fresh line so the
  // torn record stays isolated.
  bool torn = false;
  if (!fresh) {
    std::ifstream in(path, std::ios::binary);
    in.seekg(-1, std::ios::end);
    char last = '\n';
    in.get(last);
    torn = last != '\n';
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  JsonLinesWriter w;
  w.path_ = path;
  w.out_.open(path, std::ios::binary | std::ios::app);
  if (!w.out_) throw Error("io", "cannot append to " + path.string());
  if (fresh) {
    w.out_ << MakeHeader(kind).dump() + "\n";
    w.out_.flush();
  } else if (torn) {
    w.out_ << '\n';
    w.out_.flush();
  }
  return w;
}

void JsonLinesWriter::Write(const Json &record) {
  const std::string line = record.dump() + "\n";
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
  if (!out_) throw Error("io", "write failed on " + path_.string());
  ++records_;
}

std::vector<Json> ReadJsonLines(const std::filesystem::path &path,
                                std::vector<JsonLinesIssue> *issues) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path.string());
  std::vector<Json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      const std::string msg = path.string() + ":" + std::to_string(n) + ": malformed JSON line";
      if (!issues) throw Error("io", msg);
      issues->push_back({n, msg});
      continue;
    }
    if (IsHeader(j)) continue;
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<UtteranceAnnotation> ReadCorpusFile(const std::filesystem::path &path) {
  std::vector<UtteranceAnnotation> out;
  for (const Json &j : ReadJsonLines(path)) out.push_back(AnnotationFromJson(j));
  return out;
}

void WriteCorpusFile(const std::filesystem::path &path,
                     const std::vector<UtteranceAnnotation> &utterances) {
  JsonLinesWriter w(path, "corpus");
  for (const auto &u : utterances) w.Write(ToJson(u));
}

}  // namespace apa
