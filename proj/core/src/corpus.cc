// core/src/corpus.cc

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

#include "apa/corpus.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "apa/json_io.h"
#include "apa/text_util.h"

namespace apa {

namespace {

[[noreturn]] void SchemaMismatch(const std::string &id, const std::string &field,
                                 const std::string &what) {
  throw Error("corpus", "schema mismatch in utterance '" + id + "': field '" +
                            field + "' " + what);
}

const Json &Need(const Json &obj, const std::string &id, const std::string &key) {
  if (!obj.is_object()) SchemaMismatch(id, key, "has a non-object parent");
  auto it = obj.find(key);
  if (it == obj.end()) SchemaMismatch(id, key, "is missing");
  return *it;
}

double NeedNumber(const Json &obj, const std::string &id, const std::string &key) {
  const Json &v = Need(obj, id, key);
  if (!v.is_number()) SchemaMismatch(id, key, "is not a number");
  return v.get<double>();
}

std::vector<std::string> StringsOf(const Json &v, const std::string &id,
                                   const std::string &key) {
  if (v.is_string()) return SplitWhitespace(v.get<std::string>());
  if (!v.is_array()) SchemaMismatch(id, key, "is neither a string nor an array");
  std::vector<std::string> out;
  for (const Json &e : v) {
    if (!e.is_string()) SchemaMismatch(id, key, "holds a non-string");
    out.push_back(e.get<std::string>());
  }
  return out;
}

struct Membership {
  std::string split;
  std::string speaker;
  std::string audio;
};

// First column of a Kaldi-style listing, plus the rest of the line.
std::vector<std::pair<std::string, std::string>> ReadListing(
    const std::filesystem::path &p) {
  std::vector<std::pair<std::string, std::string>> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = Trim(line);
    if (t.empty()) continue;
    const auto sp = t.find_first_of(" \t");
    if (sp == std::string_view::npos)
      out.emplace_back(std::string(t), "");
    else
      out.emplace_back(std::string(t.substr(0, sp)), std::string(Trim(t.substr(sp))));
  }
  return out;
}

std::filesystem::path FindScoreFile(const std::filesystem::path &root,
                                    const SchemaDescriptor &schema) {
  const std::filesystem::path candidates[] = {
      root / schema.score_file, root / "scores.json", root / "scores.jsonl",
      root / "resource" / "scores.jsonl"};
  for (const auto &c : candidates)
    if (std::filesystem::is_regular_file(c)) return c;
  throw IngestionError("no score file found under " + root.string() +
                       " (looked for " + schema.score_file + ")");
}

struct RawRecord {
  std::string id;
  Json body;
  std::string split;  // from a JSON-Lines split field
};

std::vector<RawRecord> ReadScoreFile(const std::filesystem::path &path,
                                     const SchemaDescriptor &schema) {
  std::vector<RawRecord> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string content = ss.str();
  if (Trim(content).empty()) throw IngestionError("score file " + path.string() + " is empty");

  Json whole = Json::parse(content, nullptr, false);
  if (!whole.is_discarded() && whole.is_object() && !IsHeader(whole) &&
      !whole.contains(schema.id_field)) {
    for (auto it = whole.begin(); it != whole.end(); ++it)
      out.push_back({it.key(), it.value(), ""});
    return out;
  }
  std::vector<Json> lines;
  try {
    lines = ReadJsonLines(path);
  } catch (const Error &e) {
    throw IngestionError("score file " + path.string() +
                         " is neither a JSON object nor JSON-Lines: " + e.what());
  }
  for (Json &j : lines) {
    auto it = j.find(schema.id_field);
    if (it == j.end() || !it->is_string())
      throw Error("corpus", "schema mismatch in " + path.string() + ": record lacks string field '" +
                                schema.id_field + "'");
    RawRecord r{it->get<std::string>(), std::move(j), ""};
    auto sp = r.body.find(schema.split_field);
    if (sp != r.body.end() && sp->is_string()) r.split = sp->get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

// Builds an annotation with phones on the schema's native scale. Layout
// problems that are data errors (not schema errors) land in `violations`.
UtteranceAnnotation Convert(const RawRecord &rec, const SchemaDescriptor &schema,
                            std::vector<Violation> &violations) {
  const std::string &id = rec.id;
  const Json &j = rec.body;
  UtteranceAnnotation a;
  a.utterance_id = id;
  a.sentence.accuracy = NeedNumber(j, id, schema.accuracy);
  a.sentence.fluency = NeedNumber(j, id, schema.fluency);
  a.sentence.prosody = NeedNumber(j, id, schema.prosody);
  a.sentence.completeness = NeedNumber(j, id, schema.completeness);
  a.sentence.total = NeedNumber(j, id, schema.total);

  const Json &words = Need(j, id, schema.words);
  if (!words.is_array()) SchemaMismatch(id, schema.words, "is not an array");
  std::vector<std::vector<PhoneScore>> phones;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const Json &w = words[i];
    const std::string wf = schema.words + "[" + std::to_string(i) + "].";
    WordScore ws;
    const Json &text = Need(w, id, schema.word_text);
    if (!text.is_string()) SchemaMismatch(id, wf + schema.word_text, "is not a string");
    ws.word = text.get<std::string>();
    ws.accuracy = NeedNumber(w, id, schema.word_accuracy);
    ws.stress = NeedNumber(w, id, schema.word_stress);
    ws.total = NeedNumber(w, id, schema.word_total);
    a.words.push_back(ws);
    if (!schema.has_phones) continue;
    const auto symbols = StringsOf(Need(w, id, schema.word_phones), id, wf + schema.word_phones);
    const Json &acc = Need(w, id, schema.phone_accuracy);
    if (!acc.is_array()) SchemaMismatch(id, wf + schema.phone_accuracy, "is not an array");
    if (acc.size() != symbols.size())
      violations.push_back({wf + schema.phone_accuracy,
                            std::to_string(acc.size()) + " scores for " +
                                std::to_string(symbols.size()) + " phones"});
    std::vector<PhoneScore> group;
    for (std::size_t k = 0; k < std::min(acc.size(), symbols.size()); ++k) {
      if (!acc[k].is_number()) SchemaMismatch(id, wf + schema.phone_accuracy, "holds a non-number");
      group.push_back({symbols[k], acc[k].get<double>(), schema.phone_scale});
    }
    a.reference_phones.push_back(symbols);
    phones.push_back(std::move(group));
  }
  if (schema.has_phones) a.phones = std::move(phones);

  auto text = j.find(schema.text);
  if (text != j.end()) {
    if (!text->is_string()) SchemaMismatch(id, schema.text, "is not a string");
    a.reference_text = SplitWhitespace(text->get<std::string>());
  } else {
    for (const auto &w : a.words) a.reference_text.push_back(w.word);
  }
  auto spk = j.find(schema.speaker_field);
  if (spk != j.end() && spk->is_string()) a.speaker_id = spk->get<std::string>();
  auto audio = j.find(schema.audio_field);
  if (audio != j.end() && audio->is_string()) a.audio_path = audio->get<std::string>();
  return a;
}

std::string FallbackSpeaker(const std::string &id) {
  return id.size() > 4 ? id.substr(0, id.size() - 4) : id;
}

bool ParseBool(const std::string &v) {
  const std::string l = ToLower(v);
  if (l == "true" || l == "1" || l == "yes") return true;
  if (l == "false" || l == "0" || l == "no") return false;
  throw InvalidArgument("corpus", "not a boolean: '" + v + "'");
}

double SortedMean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  if (v.front() == v.back()) return v.front();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

SchemaDescriptor SchemaDescriptor::Load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open schema descriptor " + path.string());
  SchemaDescriptor s;
  std::map<std::string, std::string *> strings = {
      {"score_file", &s.score_file},       {"id_field", &s.id_field},
      {"split_field", &s.split_field},     {"speaker_field", &s.speaker_field},
      {"audio_field", &s.audio_field},     {"text", &s.text},
      {"accuracy", &s.accuracy},           {"fluency", &s.fluency},
      {"prosody", &s.prosody},             {"completeness", &s.completeness},
      {"total", &s.total},                 {"words", &s.words},
      {"word_text", &s.word_text},         {"word_accuracy", &s.word_accuracy},
      {"word_stress", &s.word_stress},     {"word_total", &s.word_total},
      {"word_phones", &s.word_phones},     {"phone_accuracy", &s.phone_accuracy}};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    const std::string_view t = Trim(std::string_view(line).substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw InvalidArgument("corpus", path.string() + ":" + std::to_string(n) + ": expected key = value");
    const std::string key(Trim(t.substr(0, eq)));
    const std::string value(Trim(t.substr(eq + 1)));
    if (auto it = strings.find(key); it != strings.end()) {
      *it->second = value;
    } else if (key == "splits") {
      s.splits.clear();
      for (const auto &part : Split(value, ','))
        if (!Trim(part).empty()) s.splits.emplace_back(Trim(part));
    } else if (key == "has_phones") {
      s.has_phones = ParseBool(value);
    } else if (key == "phone_scale") {
      if (value == "native") s.phone_scale = PhoneScale::kNative;
      else if (value == "rescaled") s.phone_scale = PhoneScale::kRescaled;
      else throw InvalidArgument("corpus", "phone_scale must be native or rescaled");
    } else {
      throw InvalidArgument("corpus", path.string() + ":" + std::to_string(n) +
                                          ": unknown schema key '" + key + "'");
    }
  }
  return s;
}

const UtteranceAnnotation *CorpusSplit::Find(const std::string &utterance_id) const {
  auto it = std::lower_bound(
      utterances.begin(), utterances.end(), utterance_id,
      [](const UtteranceAnnotation &u, const std::string &id) { return u.utterance_id < id; });
  if (it == utterances.end() || it->utterance_id != utterance_id) return nullptr;
  return &*it;
}

const CorpusSplit *LoadResult::Split(const std::string &name) const {
  for (const auto &s : splits)
    if (s.name == name) return &s;
  return nullptr;
}

LoadResult LoadCorpus(const std::filesystem::path &root, const SchemaDescriptor &schema) {
  if (!std::filesystem::is_directory(root))
    throw IngestionError("corpus root " + root.string() + " is not a directory");
  const auto score_path = FindScoreFile(root, schema);
  std::vector<RawRecord> records = ReadScoreFile(score_path, schema);

  std::map<std::string, Membership> membership;
  std::vector<std::string> split_names;
  for (const std::string &split : schema.splits) {
    const auto dir = root / split;
    if (!std::filesystem::is_directory(dir)) continue;
    bool listed = false;
    for (const char *listing : {"wav.scp", "text", "utt2spk"}) {
      const auto p = dir / listing;
      if (!std::filesystem::is_regular_file(p)) continue;
      listed = true;
      for (auto &[id, rest] : ReadListing(p)) {
        Membership &m = membership[id];
        m.split = split;
        if (std::string(listing) == "wav.scp") {
          // wav.scp paths are relative to the corpus root.
          const std::filesystem::path ap(rest);
          m.audio = ap.is_relative() ? (root / ap).lexically_normal().string() : rest;
        }
        if (std::string(listing) == "utt2spk") m.speaker = rest;
      }
    }
    if (listed) split_names.push_back(split);
  }
  const bool from_dirs = !split_names.empty();
  if (!from_dirs) {
    std::set<std::string> seen;
    for (const auto &r : records)
      if (!r.split.empty() && seen.insert(r.split).second) split_names.push_back(r.split);
  }
  const bool single = split_names.empty();
  if (single) split_names.push_back("all");

  LoadResult result;
  result.record_count = records.size();
  std::map<std::string, CorpusSplit> splits;
  for (const auto &n : split_names) splits[n].name = n;

  std::sort(records.begin(), records.end(),
            [](const RawRecord &a, const RawRecord &b) { return a.id < b.id; });
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].id == records[i - 1].id)
      throw IngestionError("duplicate utterance id '" + records[i].id + "'");

  for (const RawRecord &rec : records) {
    std::vector<Violation> violations;
    UtteranceAnnotation a = Convert(rec, schema, violations);
    std::string split = single ? "all" : rec.split;
    if (from_dirs) {
      auto it = membership.find(rec.id);
      split = it == membership.end() ? "" : it->second.split;
      if (it != membership.end()) {
        if (a.speaker_id.empty()) a.speaker_id = it->second.speaker;
        if (a.audio_path.empty()) a.audio_path = it->second.audio;
      }
    }
    if (a.speaker_id.empty()) a.speaker_id = FallbackSpeaker(a.utterance_id);

    auto more = ValidateAnnotation(a, StressRule::kAveraged);
    violations.insert(violations.end(), more.begin(), more.end());
    if (!violations.empty()) {
      result.quarantine.push_back({a.utterance_id, std::move(violations)});
      continue;
    }
    if (a.phones)
      for (auto &g : *a.phones)
        for (auto &p : g)
          if (p.scale == PhoneScale::kNative) {
            p.accuracy = RescalePhone(p.accuracy);
            p.scale = PhoneScale::kRescaled;
          }
    if (split.empty()) {
      result.unassigned.push_back(a.utterance_id);
      continue;
    }
    CorpusSplit &cs = splits[split];
    cs.name = split;
    cs.speaker_index[a.speaker_id].push_back(a.utterance_id);
    cs.utterances.push_back(std::move(a));
  }
  for (const auto &n : split_names) result.splits.push_back(std::move(splits[n]));
  return result;
}

UtteranceAnnotation AverageRaters(const RaterAnnotationSet &s) {
  if (s.raters.size() < 2)
    throw InvalidArgument("corpus", "utterance '" + s.utterance_id +
                                        "' needs at least two raters, has " +
                                        std::to_string(s.raters.size()));
  const UtteranceAnnotation &first = s.raters.begin()->second;
  auto misaligned = [&](const std::string &rater, const std::string &what) {
    throw AlignmentError("utterance '" + s.utterance_id + "': rater '" + rater +
                         "' " + what + " differs from rater '" + s.raters.begin()->first + "'");
  };
  for (const auto &[rater, a] : s.raters) {
    if (a.reference_text != first.reference_text) misaligned(rater, "reference text");
    if (a.words.size() != first.words.size()) misaligned(rater, "word count");
    for (std::size_t i = 0; i < a.words.size(); ++i)
      if (a.words[i].word != first.words[i].word) misaligned(rater, "word token " + std::to_string(i));
    if (a.phones.has_value() != first.phones.has_value()) misaligned(rater, "phone presence");
    if (a.phones) {
      if (a.phones->size() != first.phones->size()) misaligned(rater, "phone group count");
      for (std::size_t g = 0; g < a.phones->size(); ++g) {
        if ((*a.phones)[g].size() != (*first.phones)[g].size())
          misaligned(rater, "phone count in group " + std::to_string(g));
        for (std::size_t k = 0; k < (*a.phones)[g].size(); ++k)
          if ((*a.phones)[g][k].phone != (*first.phones)[g][k].phone)
            misaligned(rater, "phone symbol");
      }
    }
  }

  UtteranceAnnotation out = first;
  auto mean = [&](auto &&get) {
    std::vector<double> v;
    v.reserve(s.raters.size());
    for (const auto &[rater, a] : s.raters) v.push_back(get(a));
    return SortedMean(std::move(v));
  };
  for (Aspect asp : AspectsOf(Granularity::kSentence))
    out.sentence.Set(asp, mean([asp](const UtteranceAnnotation &a) { return a.sentence.Get(asp); }));
  for (std::size_t i = 0; i < out.words.size(); ++i)
    for (Aspect asp : AspectsOf(Granularity::kWord))
      out.words[i].Set(asp, mean([i, asp](const UtteranceAnnotation &a) {
        return a.words[i].Get(asp);
      }));
  if (out.phones) {
    for (std::size_t g = 0; g < out.phones->size(); ++g)
      for (std::size_t k = 0; k < (*out.phones)[g].size(); ++k) {
        const PhoneScale scale = (*out.phones)[g][k].scale;
        (*out.phones)[g][k].accuracy = mean([g, k, scale](const UtteranceAnnotation &a) {
          return (*a.phones)[g][k].On(scale);
        });
      }
  }
  return out;
}

bool QcThresholds::IsValid() const {
  for (double v : {sentence_pcc_min, sentence_scc_min, word_pcc_min, word_scc_min})
    if (!(v >= -1.0 && v <= 1.0)) return false;
  return true;
}

bool QcReport::passed() const {
  return std::all_of(pairs.begin(), pairs.end(),
                     [](const RaterPairResult &p) { return p.passed(); });
}

QcReport RaterQc(const std::vector<RaterAnnotationSet> &sets, const QcThresholds &t) {
  if (!t.IsValid()) throw InvalidArgument("corpus", "QC thresholds must lie in [-1,1]");
  if (sets.size() < 2)
    throw InsufficientDataError("rater QC needs at least 2 utterances, got " +
                                std::to_string(sets.size()));
  std::vector<std::string> raters;
  for (const auto &[id, a] : sets.front().raters) raters.push_back(id);
  if (raters.size() < 2) throw InsufficientDataError("rater QC needs at least 2 raters");

  std::vector<const RaterAnnotationSet *> ordered;
  for (const auto &s : sets) {
    if (s.raters.size() != raters.size() ||
        !std::all_of(raters.begin(), raters.end(),
                     [&s](const std::string &r) { return s.raters.count(r) > 0; }))
      throw AlignmentError("utterance '" + s.utterance_id + "' has a different rater set");
    ordered.push_back(&s);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const RaterAnnotationSet *a, const RaterAnnotationSet *b) {
              return a->utterance_id < b->utterance_id;
            });

  std::map<std::string, std::vector<double>> sentence, word;
  for (const RaterAnnotationSet *s : ordered) {
    const auto &ref = s->raters.begin()->second;
    for (const auto &r : raters) {
      const UtteranceAnnotation &a = s->raters.at(r);
      if (a.words.size() != ref.words.size())
        throw AlignmentError("utterance '" + s->utterance_id + "': rater '" + r +
                             "' word count differs");
      for (Aspect asp : AspectsOf(Granularity::kSentence))
        sentence[r].push_back(a.sentence.Get(asp));
      for (const WordScore &w : a.words)
        for (Aspect asp : AspectsOf(Granularity::kWord)) word[r].push_back(w.Get(asp));
    }
  }

  QcReport report;
  report.utterances = ordered.size();
  auto check = [&t](RaterPairResult &p, const char *name, const MetricValue &m, double min) {
    if (!m.defined()) {
      p.flags.push_back(std::string(name) + " undefined (" + std::string(ToString(*m.reason)) + ")");
      return;
    }
    const bool ok = t.strict ? *m.value > min : *m.value >= min;
    if (!ok)
      p.flags.push_back(std::string(name) + " " + FormatFixed(*m.value, 4) +
                        (t.strict ? " <= " : " < ") + FormatFixed(min, 2));
  };
  for (std::size_t i = 0; i < raters.size(); ++i)
    for (std::size_t j = i + 1; j < raters.size(); ++j) {
      RaterPairResult p;
      p.rater_a = raters[i];
      p.rater_b = raters[j];
      p.sentence_pcc = Pcc(sentence[p.rater_a], sentence[p.rater_b]);
      p.sentence_scc = Scc(sentence[p.rater_a], sentence[p.rater_b]);
      p.word_pcc = Pcc(word[p.rater_a], word[p.rater_b]);
      p.word_scc = Scc(word[p.rater_a], word[p.rater_b]);
      check(p, "sentence_pcc", p.sentence_pcc, t.sentence_pcc_min);
      check(p, "sentence_scc", p.sentence_scc, t.sentence_scc_min);
      check(p, "word_pcc", p.word_pcc, t.word_pcc_min);
      check(p, "word_scc", p.word_scc, t.word_scc_min);
      report.pairs.push_back(std::move(p));
    }
  return report;
}

Histogram DistributionReport(const CorpusSplit &split, Granularity g, Aspect a,
                             const std::vector<double> &edges) {
  if (!IsLegal(g, a))
    throw InvalidArgument("corpus", "unknown aspect " + std::string(ToString(a)) +
                                        " at " + std::string(ToString(g)) + " level");
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw InvalidArgument("corpus", "bucket edges must be strictly increasing, at least two");
  Histogram h;
  h.edges = edges;
  h.counts.assign(edges.size() - 1, 0);
  auto add = [&h, &edges](double v) {
    ++h.total;
    if (v < edges.front()) { ++h.below; return; }
    if (v > edges.back()) { ++h.above; return; }
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    std::size_t bucket = static_cast<std::size_t>(it - edges.begin()) - 1;
    if (bucket >= h.counts.size()) bucket = h.counts.size() - 1;  // v == last edge
    ++h.counts[bucket];
  };
  for (const UtteranceAnnotation &u : split.utterances) {
    switch (g) {
      case Granularity::kSentence: add(u.sentence.Get(a)); break;
      case Granularity::kWord:
        for (const WordScore &w : u.words) add(w.Get(a));
        break;
      case Granularity::kPhone:
        if (u.phones)
          for (const auto &grp : *u.phones)
            for (const PhoneScore &p : grp) add(p.On(PhoneScale::kRescaled));
        break;
    }
  }
  return h;
}

}  // namespace apa
