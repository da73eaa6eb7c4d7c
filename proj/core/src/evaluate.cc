// core/src/evaluate.cc

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

#include "apa/evaluate.h"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "apa/text_util.h"

namespace apa {

Json ToJson(const PredictionRecord &p) {
  Json j = {{"utterance_id", p.utterance_id}};
  if (p.response)
    j["response"] = ToJson(*p.response);
  else
    j["error"] = p.error;
  return j;
}

PredictionRecord PredictionFromJson(const Json &j) {
  if (!j.is_object() || !j.contains("utterance_id") || !j["utterance_id"].is_string())
    throw Error("metrics", "prediction record without utterance_id");
  PredictionRecord p;
  p.utterance_id = j["utterance_id"].get<std::string>();
  const bool has_resp = j.contains("response") && !j["response"].is_null();
  const bool has_err = j.contains("error") && !j["error"].is_null();
  if (has_resp == has_err)
    throw Error("metrics", "prediction " + p.utterance_id +
                               " must carry exactly one of response and error");
  if (has_resp) {
    Json r = j["response"];
    r["utterance_id"] = p.utterance_id;
    p.response = ResponseFromJson(r);
  } else {
    p.error = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
    if (p.error.empty()) p.error = "unspecified";
  }
  return p;
}

const MetricCell *MetricReport::Find(Granularity g, Aspect a) const {
  for (const MetricCell &c : cells)
    if (c.granularity == g && c.aspect == a) return &c;
  return nullptr;
}

namespace {

// Carries every requested aspect of every requested section.
bool Complete(const AssessmentResponse &r, const TaskSpec &task) {
  auto covers = [](const ScoreSet &s, const std::vector<Aspect> &as) {
    return std::all_of(as.begin(), as.end(), [&](Aspect a) { return s.Has(a); });
  };
  if (task.Has(Granularity::kSentence) &&
      (!r.sentence || !covers(*r.sentence, task.Aspects(Granularity::kSentence))))
    return false;
  if (task.Has(Granularity::kWord)) {
    if (!r.words) return false;
    for (const ResponseWord &w : *r.words)
      if (!covers(w.scores, task.Aspects(Granularity::kWord))) return false;
  }
  if (task.Has(Granularity::kPhone) && !r.phones) return false;
  return true;
}

bool Aligned(const AlignmentReport &rep, AlignmentPolicy policy) {
  if (!rep.CountsMatch()) return false;
  if (policy == AlignmentPolicy::kStrict) return rep.empty();
  auto paired = [](const std::vector<TokenMismatch> &ms) {
    return std::all_of(ms.begin(), ms.end(), [](const TokenMismatch &m) {
      return !m.expected.empty() && !m.got.empty();
    });
  };
  return paired(rep.word_mismatches) && paired(rep.phone_mismatches);
}

struct Series {
  std::vector<double> pred;
  std::vector<double> gold;
};

}  // namespace

MetricReport Evaluate(const std::vector<PredictionRecord> &predictions,
                      const std::vector<UtteranceAnnotation> &gold, const TaskSpec &task,
                      const EvaluateOptions &options) {
  if (task.empty()) throw InvalidArgument("metrics", "empty task");
  std::unordered_map<std::string, const UtteranceAnnotation *> by_id;
  for (const UtteranceAnnotation &a : gold) by_id.emplace(a.utterance_id, &a);

  MetricReport rep;
  rep.task = task;
  rep.phone_rmse_scale = options.phone_rmse_scale;
  rep.predictions = predictions.size();

  std::vector<std::pair<Granularity, Aspect>> keys;
  for (Granularity g : {Granularity::kSentence, Granularity::kWord, Granularity::kPhone})
    for (Aspect a : task.Aspects(g)) keys.emplace_back(g, a);
  std::vector<Series> series(keys.size());

  std::unordered_set<std::string> seen;
  for (const PredictionRecord &p : predictions) {
    auto exclude = [&](const char *why) { ++rep.excluded[why]; };
    if (!p.response) {
      exclude("parse-error");
      continue;
    }
    const auto it = by_id.find(p.utterance_id);
    if (it == by_id.end()) {
      exclude("unknown-utterance");
      continue;
    }
    if (!seen.insert(p.utterance_id).second) {
      exclude("duplicate");
      continue;
    }
    const UtteranceAnnotation &a = *it->second;
    const AssessmentResponse &r = *p.response;
    if (!Complete(r, task)) {
      exclude("incomplete");
      continue;
    }
    if (task.Has(Granularity::kPhone) && !a.HasPhones()) {
      exclude("missing-gold-phones");
      continue;
    }
    if (!Aligned(Align(r, a), options.alignment)) {
      exclude("alignment");
      continue;
    }
    ++rep.used;
    for (std::size_t k = 0; k < keys.size(); ++k) {
      const auto [g, asp] = keys[k];
      Series &s = series[k];
      switch (g) {
        case Granularity::kSentence:
          s.pred.push_back(r.sentence->Get(asp));
          s.gold.push_back(a.sentence.Get(asp));
          break;
        case Granularity::kWord:
          for (std::size_t i = 0; i < a.words.size(); ++i) {
            s.pred.push_back((*r.words)[i].scores.Get(asp));
            s.gold.push_back(a.words[i].Get(asp));
          }
          break;
        case Granularity::kPhone:
          for (std::size_t gi = 0; gi < a.phones->size(); ++gi)
            for (std::size_t pi = 0; pi < (*a.phones)[gi].size(); ++pi) {
              s.pred.push_back((*r.phones)[gi][pi].accuracy);
              s.gold.push_back((*a.phones)[gi][pi].On(PhoneScale::kRescaled));
            }
          break;
      }
    }
  }
  std::unordered_set<std::string> answered;
  for (const PredictionRecord &p : predictions) answered.insert(p.utterance_id);
  for (const UtteranceAnnotation &a : gold)
    if (!answered.count(a.utterance_id)) ++rep.gold_without_prediction;

  if (rep.used == 0)
    throw Error("metrics", "no usable utterances among " + std::to_string(predictions.size()) +
                               " predictions");

  for (std::size_t k = 0; k < keys.size(); ++k) {
    MetricCell c;
    c.granularity = keys[k].first;
    c.aspect = keys[k].second;
    const Series &s = series[k];
    if (s.pred.empty()) {
      c.pcc = c.scc = c.rmse = MetricValue::Undefined(UndefinedReason::kTooFewSamples, 0);
    } else {
      c.pcc = Pcc(s.pred, s.gold);
      c.scc = Scc(s.pred, s.gold);
      if (c.granularity == Granularity::kPhone &&
          options.phone_rmse_scale == PhoneScale::kNative) {
        std::vector<double> p = s.pred, q = s.gold;
        for (double &v : p) v = UnscalePhone(v);
        for (double &v : q) v = UnscalePhone(v);
        c.rmse = Rmse(p, q);
      } else {
        c.rmse = Rmse(s.pred, s.gold);
      }
    }
    rep.cells.push_back(std::move(c));
  }
  return rep;
}

namespace {

std::string Cell2(const MetricValue &v) { return v.defined() ? FormatFixed(*v.value, 2) : "-"; }

std::string ScaleName(PhoneScale s) {
  return s == PhoneScale::kNative ? "native [0,2]" : "rescaled [0,10]";
}

std::string Title(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

struct Column {
  std::string group;
  std::string label;
  std::string value;
};

std::string Pad(const std::string &s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

std::string RenderText(const MetricReport &r, const std::string &row_label) {
  // Results-table order: phone, word, then sentence.
  std::vector<Column> cols;
  for (Granularity g : {Granularity::kPhone, Granularity::kWord, Granularity::kSentence}) {
    for (const MetricCell &c : r.cells) {
      if (c.granularity != g) continue;
      if (g == Granularity::kPhone) {
        cols.push_back({"Phone", "RMSE", Cell2(c.rmse)});
        cols.push_back({"Phone", "PCC / SCC", Cell2(c.pcc) + " / " + Cell2(c.scc)});
      } else {
        cols.push_back({g == Granularity::kWord ? "Word (PCC / SCC)" : "Sentence (PCC / SCC)",
                        Title(ToString(c.aspect)), Cell2(c.pcc) + " / " + Cell2(c.scc)});
      }
    }
  }
  std::vector<std::size_t> width(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i)
    width[i] = std::max(cols[i].label.size(), cols[i].value.size());
  // Widen the last column of a group when the group title needs the room.
  for (std::size_t i = 0; i < cols.size();) {
    std::size_t j = i;
    std::size_t span = 0;
    while (j < cols.size() && cols[j].group == cols[i].group) span += width[j++] + 2;
    span -= 2;
    if (cols[i].group.size() > span) width[j - 1] += cols[i].group.size() - span;
    i = j;
  }
  const std::size_t lw = std::max<std::size_t>(row_label.size(), 5);
  std::ostringstream os;
  std::string line1 = Pad("", lw), line2 = Pad("", lw), line3 = Pad(row_label, lw);
  for (std::size_t i = 0; i < cols.size();) {
    std::size_t j = i;
    std::size_t span = 0;
    while (j < cols.size() && cols[j].group == cols[i].group) span += width[j++] + 2;
    line1 += " | " + Pad(cols[i].group, span - 2);
    for (std::size_t k = i; k < j; ++k) {
      const std::string sep = k == i ? " | " : "  ";
      line2 += sep + Pad(cols[k].label, width[k]);
      line3 += sep + Pad(cols[k].value, width[k]);
    }
    i = j;
  }
  auto rstrip = [](std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
  };
  os << rstrip(line1) << '\n' << rstrip(line2) << '\n' << rstrip(line3) << '\n';
  os << "\nutterances used: " << r.used << " of " << r.predictions;
  if (!r.excluded.empty()) {
    os << " (excluded:";
    bool first = true;
    for (const auto &[why, n] : r.excluded) {
      os << (first ? " " : ", ") << why << ' ' << n;
      first = false;
    }
    os << ')';
  }
  os << '\n';
  if (r.gold_without_prediction)
    os << "gold utterances without prediction: " << r.gold_without_prediction << '\n';
  if (r.task.Has(Granularity::kPhone))
    os << "phone RMSE scale: " << ScaleName(r.phone_rmse_scale) << '\n';
  for (const MetricCell &c : r.cells) {
    for (const auto &[name, v] : {std::pair<const char *, const MetricValue *>{"PCC", &c.pcc},
                                  {"SCC", &c.scc}}) {
      if (v->defined()) continue;
      os << "undefined: " << ToString(c.granularity) << ' ' << ToString(c.aspect) << ' ' << name
         << " (" << ToString(*v->reason) << ", n=" << v->n << ")\n";
    }
  }
  return os.str();
}

Json ValueJson(const MetricValue &v) {
  Json j = {{"n", v.n}};
  j["value"] = v.defined() ? Json(*v.value) : Json(nullptr);
  if (v.reason) j["undefined_reason"] = std::string(ToString(*v.reason));
  return j;
}

}  // namespace

Json ReportToJson(const MetricReport &r) {
  Json j;
  j = MakeHeader("metric-report");
  j["task"] = r.task.ToString();
  j["phone_rmse_scale"] = r.phone_rmse_scale == PhoneScale::kNative ? "native" : "rescaled";
  j["predictions"] = r.predictions;
  j["used"] = r.used;
  j["excluded"] = Json::object();
  for (const auto &[why, n] : r.excluded) j["excluded"][why] = n;
  j["gold_without_prediction"] = r.gold_without_prediction;
  Json cells = Json::array();
  for (const MetricCell &c : r.cells)
    cells.push_back({{"granularity", std::string(ToString(c.granularity))},
                     {"aspect", std::string(ToString(c.aspect))},
                     {"pcc", ValueJson(c.pcc)},
                     {"scc", ValueJson(c.scc)},
                     {"rmse", ValueJson(c.rmse)}});
  j["cells"] = std::move(cells);
  return j;
}

namespace {

MetricValue ValueFromJson(const Json &j) {
  MetricValue v;
  v.n = j.at("n").get<std::size_t>();
  if (!j.at("value").is_null()) {
    v.value = j["value"].get<double>();
    return v;
  }
  const std::string why = j.at("undefined_reason").get<std::string>();
  for (UndefinedReason r : {UndefinedReason::kZeroVarianceGold, UndefinedReason::kZeroVariancePred,
                            UndefinedReason::kTooFewSamples})
    if (ToString(r) == why) v.reason = r;
  if (!v.reason) throw Error("metrics", "unknown undefined_reason '" + why + "'");
  return v;
}

}  // namespace

MetricReport ReportFromJson(const Json &j) {
  try {
    MetricReport r;
    r.task = TaskSpec::Parse(j.at("task").get<std::string>());
    r.phone_rmse_scale =
        j.at("phone_rmse_scale") == "native" ? PhoneScale::kNative : PhoneScale::kRescaled;
    r.predictions = j.at("predictions").get<std::size_t>();
    r.used = j.at("used").get<std::size_t>();
    for (const auto &[why, n] : j.at("excluded").items()) r.excluded[why] = n.get<std::size_t>();
    r.gold_without_prediction = j.value("gold_without_prediction", std::size_t{0});
    for (const Json &c : j.at("cells")) {
      MetricCell cell;
      const auto g = ParseGranularity(c.at("granularity").get<std::string>());
      const auto a = ParseAspect(c.at("aspect").get<std::string>());
      if (!g || !a) throw Error("metrics", "malformed report: unknown cell " + c.dump());
      cell.granularity = *g;
      cell.aspect = *a;
      cell.pcc = ValueFromJson(c.at("pcc"));
      cell.scc = ValueFromJson(c.at("scc"));
      cell.rmse = ValueFromJson(c.at("rmse"));
      r.cells.push_back(std::move(cell));
    }
    return r;
  } catch (const Json::exception &e) {
    throw Error("metrics", std::string("malformed report: ") + e.what());
  }
}

std::string RenderReport(const MetricReport &r, ReportFormat format, const std::string &row_label) {
  if (format == ReportFormat::kJson) return ReportToJson(r).dump(2) + "\n";
  return RenderText(r, row_label);
}

}  // namespace apa
