// tests/acceptance/acceptance_main.cc

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

// Acceptance suite: one line per criterion, PASS / FAIL / SKIP.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "apa/corpus.h"
#include "apa/evaluate.h"
#include "apa/metrics.h"
#include "apa/prefsim.h"
#include "apa/respparse.h"
#include "apa/simpo.h"
#include "apa_cli.h"
#include "test_support.h"

namespace apa {
namespace {

// Tolerances and budgets.
constexpr double kOracleTol = 1e-9;
constexpr double kLog2Tol = 1e-12;
constexpr double kGradTol = 1e-5;
constexpr double kGradStep = 1e-5;
constexpr double kRescaleTol = 1e-12;
constexpr double kSmokeTol = 1e-12;
constexpr double kQcTol = 1e-9;
constexpr double kMinTrainedGap = 0.5;

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kPass;
  std::string detail;
};

Outcome Pass(std::string d) { return {Status::kPass, std::move(d)}; }
Outcome Fail(std::string d) { return {Status::kFail, std::move(d)}; }

std::string Num(double v, const char *fmt = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

// ------------------------------------------------------------ metrics

long double OraclePcc(const std::vector<double> &x, const std::vector<double> &y) {
  const std::size_t n = x.size();
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> OracleRanks(const std::vector<double> &v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) less += w < v[i], equal += w == v[i];
    r[i] = 1 + less + (equal - 1) / 2;
  }
  return r;
}

bool Constant(const std::vector<double> &v) {
  for (double x : v)
    if (x != v[0]) return false;
  return true;
}

std::vector<double> Series(std::mt19937_64 &rng, std::size_t n) {
  std::vector<double> v(n);
  if (rng() % 2) {
    const int levels = 2 + static_cast<int>(rng() % 8);  // ties
    for (double &x : v) x = static_cast<double>(rng() % levels) * 1.5 - 3;
  } else {
    std::normal_distribution<double> g(5, 2);
    for (double &x : v) x = g(rng);
  }
  return v;
}

Outcome MetricOracle() {
  std::mt19937_64 rng(101);
  double worst = 0;
  int undefined = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 2 + rng() % 49;
    const auto x = Series(rng, n), y = Series(rng, n);
    long double se = 0;
    for (std::size_t i = 0; i < n; ++i) se += (x[i] - y[i]) * (x[i] - y[i]);
    worst = std::max(worst, std::abs(*Rmse(x, y).value - static_cast<double>(std::sqrt(se / n))));
    const MetricValue p = Pcc(x, y), s = Scc(x, y);
    if (Constant(x) || Constant(y)) {
      if (p.defined() || s.defined()) return Fail("constant series gave a defined value");
      ++undefined;
      continue;
    }
    worst = std::max(worst, std::abs(*p.value - static_cast<double>(OraclePcc(x, y))));
    worst = std::max(worst, std::abs(*s.value - static_cast<double>(OraclePcc(OracleRanks(x),
                                                                             OracleRanks(y)))));
  }
  const std::string d = "max |diff| " + Num(worst) + " over 1000 series (" +
                        std::to_string(undefined) + " undefined), tol " + Num(kOracleTol);
  return worst <= kOracleTol ? Pass(d) : Fail(d);
}

Outcome SccIdentity() {
  std::mt19937_64 rng(102);
  int checked = 0;
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 2 + rng() % 49;
    const auto x = Series(rng, n), y = Series(rng, n);
    const MetricValue s = Scc(x, y), p = Pcc(AverageRanks(x), AverageRanks(y));
    if (s.defined() != p.defined()) return Fail("definedness differs at series " + std::to_string(k));
    if (!s.defined()) continue;
    if (*s.value != *p.value)
      return Fail("series " + std::to_string(k) + ": " + Num(*s.value, "%.17g") + " vs " +
                  Num(*p.value, "%.17g"));
    ++checked;
  }
  return Pass("bit-identical on 500 series (" + std::to_string(checked) + " defined)");
}

Outcome DegenerateVariance() {
  std::mt19937_64 rng(103);
  std::vector<UtteranceAnnotation> gold;
  std::vector<PredictionRecord> preds;
  const TaskSpec t = TaskSpec::Parse("sentence:completeness,total");
  for (int i = 0; i < 30; ++i) {
    UtteranceAnnotation a = testing::RandomAnnotation(rng, "u" + std::to_string(i));
    a.sentence.completeness = 10.0;
    AssessmentResponse r = FromAnnotation(a, t);
    r.sentence->Set(Aspect::kCompleteness, testing::Tenth(rng, 5, 10));
    preds.push_back({a.utterance_id, r, ""});
    gold.push_back(std::move(a));
  }
  const MetricReport rep = Evaluate(preds, gold, t);
  const MetricCell *c = rep.Find(Granularity::kSentence, Aspect::kCompleteness);
  if (c->pcc.defined() || c->scc.defined()) return Fail("completeness correlation defined");
  if (c->pcc.reason != UndefinedReason::kZeroVarianceGold ||
      c->scc.reason != UndefinedReason::kZeroVarianceGold)
    return Fail("wrong undefined reason");
  if (!rep.Find(Granularity::kSentence, Aspect::kTotal)->pcc.defined())
    return Fail("total should stay defined");
  const std::string text = RenderReport(rep, ReportFormat::kText);
  if (text.find("- / -") == std::string::npos) return Fail("table lacks '- / -'");
  if (text.find("undefined: sentence completeness PCC (zero-variance-gold, n=30)") ==
      std::string::npos)
    return Fail("reason line missing");
  const Json j = ReportToJson(rep);
  if (!j["cells"][0]["pcc"]["value"].is_null()) return Fail("JSON value not null");
  return Pass("completeness PCC/SCC undefined (zero-variance-gold), rendered '- / -'");
}

// ------------------------------------------------------------ simpo

Outcome SimpoAnalytics() {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    SimpoConfig c;
    c.beta = 0.01 + 5 * u(rng);
    c.gamma = 3 * u(rng);
    const double rn = -10 * u(rng);
    worst = std::max(worst, std::abs(SimpoLoss(rn + c.gamma, rn, c) - std::log(2.0)));
  }
  if (worst > kLog2Tol) return Fail("log 2 at gap=gamma off by " + Num(worst));
  for (int k = 0; k < 1000; ++k) {
    SimpoConfig c;
    c.beta = 0.01 + 2 * u(rng);
    c.gamma = 2 * u(rng);
    // Dyadic rewards and shifts keep r + shift exact.
    const double rp = -std::ldexp(static_cast<double>(rng() % 4096), -8);
    const double rn = -std::ldexp(static_cast<double>(rng() % 4096), -8);
    const double shift = -std::ldexp(static_cast<double>(rng() % 256), -4);
    if (SimpoLoss(rp + shift, rn + shift, c) != SimpoLoss(rp, rn, c))
      return Fail("translation changed the loss at trial " + std::to_string(k));
  }
  SimpoConfig c;
  double prev = INFINITY;
  for (int i = 0; i < 1000; ++i) {
    const double gap = -20.0 + 40.0 * i / 999.0;
    const double l = SimpoLoss(gap - 5.0, -5.0, c);
    if (!(l < prev)) return Fail("not decreasing at gap " + Num(gap));
    prev = l;
  }
  return Pass("log2 err " + Num(worst) + " (tol " + Num(kLog2Tol) +
              "); 1000 exact translations; strictly decreasing on 1000-point sweep");
}

Outcome GradientCheck() {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t v = 2 + rng() % 7;
    ToyScorer s = ToyScorer::Random(v, rng, 2.0);
    std::vector<PreferenceExample> batch(1 + rng() % 4);
    auto seq = [&] {
      TokenSeq t(1 + rng() % 32);
      for (int &x : t) x = static_cast<int>(rng() % v);
      return t;
    };
    for (auto &ex : batch) ex = {seq(), seq()};
    SimpoConfig c;
    c.beta = 0.01 + 1.99 * u(rng);
    c.gamma = 2 * u(rng);
    c.lambda = u(rng);
    worst = std::max(worst, CheckGradient(batch, s, c, kGradStep).max_rel_error);
  }
  const std::string d = "max rel err " + Num(worst) + " over 100 configs, tol " + Num(kGradTol);
  return worst < kGradTol ? Pass(d) : Fail(d);
}

Outcome ToyTraining() {
  std::mt19937_64 rng(106);
  const auto pairs = SyntheticPairs(64, 8, rng);
  ToyScorer s(8);
  const SimpoConfig c;
  const auto trace = TrainToy(pairs, s, c, 2000, 1.0);
  const TraceRow &a = trace.front(), &b = trace.back();
  const std::string d = "gap " + Num(a.mean_gap) + " -> " + Num(b.mean_gap) + ", loss " +
                        Num(a.total, "%.4f") + " -> " + Num(b.total, "%.4f");
  return b.mean_gap > kMinTrainedGap && b.total < a.total ? Pass(d) : Fail(d);
}

// ------------------------------------------------------------ respparse

Outcome ParserRoundTripFuzz() {
  std::mt19937_64 rng(107);
  const auto tasks = testing::AllTasks();
  for (int k = 0; k < 10000; ++k) {
    const TaskSpec &t = tasks[k % tasks.size()];
    const AssessmentResponse r = testing::RandomResponse(rng, t);
    std::string text;
    try {
      text = Serialize(r, t);
      if (!(Parse(text, t).response == r)) return Fail("round trip differs for " + t.ToString());
    } catch (const Error &e) {
      return Fail(std::string("round trip threw: ") + e.what());
    }
  }
  const TaskSpec full = TaskSpec::Full();
  const std::string seed_text =
      "Sentence Scores: 8.0 9.0 7.5 10.0 8.2\nWord Scores: A/8.0/10.0/8.5\nPhone Scores: AH/9.0";
  std::size_t rejected = 0;
  for (int k = 0; k < 100000; ++k) {
    std::string s;
    if (k % 2) {
      s.resize(rng() % 200);
      for (char &ch : s) ch = static_cast<char>(rng() & 0xFF);
    } else {
      s = seed_text;
      for (int e = 0, m = 1 + static_cast<int>(rng() % 6); e < m && !s.empty(); ++e)
        s[rng() % s.size()] = static_cast<char>(rng() & 0xFF);
    }
    for (ParseMode mode : {ParseMode::kStrict, ParseMode::kLenient}) {
      try {
        Parse(s, full, mode);
      } catch (const ParseError &) {
        ++rejected;
      } catch (const std::exception &e) {
        return Fail(std::string("non-parse exception: ") + e.what());
      }
    }
  }
  return Pass("10000 round trips over " + std::to_string(tasks.size()) +
              " tasks; 100000 fuzz inputs, " + std::to_string(rejected) +
              " parses rejected cleanly");
}

// ------------------------------------------------------------ prefsim

std::map<std::string, double> Flatten(const AssessmentResponse &r) {
  std::map<std::string, double> out;
  if (r.sentence)
    for (Aspect a : r.sentence->Present())
      out["sentence." + std::string(ToString(a))] = r.sentence->Get(a);
  if (r.words)
    for (std::size_t i = 0; i < r.words->size(); ++i)
      for (Aspect a : (*r.words)[i].scores.Present())
        out["words[" + std::to_string(i) + "]." + std::string(ToString(a))] =
            (*r.words)[i].scores.Get(a);
  if (r.phones)
    for (std::size_t g = 0; g < r.phones->size(); ++g)
      for (std::size_t k = 0; k < (*r.phones)[g].size(); ++k)
        out["phones[" + std::to_string(g) + "][" + std::to_string(k) + "].accuracy"] =
            (*r.phones)[g][k].accuracy;
  return out;
}

Outcome PairInvariants() {
  std::mt19937_64 rng(108);
  CorpusSplit split;
  for (int i = 0; i < 200; ++i)
    split.utterances.push_back(testing::RandomAnnotation(rng, "u" + std::to_string(1000 + i)));
  const TaskSpec full = TaskSpec::Full();
  const char *targets[] = {"sentence:accuracy", "sentence:fluency", "sentence:prosody",
                           "sentence:completeness", "sentence:total", "word:accuracy",
                           "word:stress", "word:total", "phone:accuracy"};
  std::size_t pairs = 0;
  bool deterministic = true;
  for (int ti = 0; ti < 9 && pairs < 1000; ++ti) {
    PerturbConfig c;
    c.target = PerturbTarget::Parse(targets[ti]);
    c.seed = 1234 + ti;
    const PairDataset d = GenerateDataset(split, full, c, 1, 1);
    std::string a, b;
    for (const auto &p : d.pairs) a += PairToJson(p, full).dump() + "\n";
    for (const auto &p : GenerateDataset(split, full, c, 1, 4).pairs)
      b += PairToJson(p, full).dump() + "\n";
    deterministic = deterministic && a == b;
    for (const PreferencePair &p : d.pairs) {
      ++pairs;
      const auto pos = Flatten(p.positive), neg = Flatten(p.negative);
      if (!(p.positive == FromAnnotation(*split.Find(p.utterance_id), full)))
        return Fail("chosen is not gold for " + p.utterance_id);
      std::map<std::string, const FieldChange *> listed;
      for (const FieldChange &ch : p.perturbation.changes) listed[ch.field] = &ch;
      if (p.perturbation.changes.empty() || p.perturbation.changes[0].field != p.perturbation.item)
        return Fail("target change not recorded first");
      for (const auto &[field, v] : pos) {
        const double nv = neg.at(field);
        auto it = listed.find(field);
        if (nv != v && it == listed.end()) return Fail("unlisted change to " + field);
        if (it != listed.end() && (it->second->before != v || it->second->after != nv))
          return Fail("descriptor mismatch on " + field);
        const bool stress = field.find(".stress") != std::string::npos;
        const AspectScale &scale = stress ? scales::StressRater() : scales::Score();
        if (!scale.Contains(nv) && !(stress && scales::StressAveraged().Contains(nv)))
          return Fail("out of scale " + field + " = " + Num(nv));
      }
    }
  }
  if (!deterministic) return Fail("regeneration differed between runs");
  if (pairs < 1000) return Fail("only " + std::to_string(pairs) + " pairs generated");
  return Pass(std::to_string(pairs) +
              " pairs: diff limited to target + propagated fields, in scale, byte-identical rerun");
}

Outcome RescaleLaw() {
  std::mt19937_64 rng(109);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<double> p(n), g(n), p10(n), g10(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = testing::Tenth(rng, 0, 2);
      g[i] = testing::Tenth(rng, 0, 2);
      p10[i] = RescalePhone(p[i]);
      g10[i] = RescalePhone(g[i]);
    }
    worst = std::max(worst, std::abs(*Rmse(p10, g10).value - 5 * *Rmse(p, g).value));
  }
  const std::string d = "max |diff| " + Num(worst) + " over 1000 series, tol " + Num(kRescaleTol);
  return worst <= kRescaleTol ? Pass(d) : Fail(d);
}

// ------------------------------------------------------------ corpus

Outcome CorpusFacts() {
  const char *root = std::getenv("APA_SO762_ROOT");
  if (!root || !*root) return {Status::kSkip, "APA_SO762_ROOT not set"};
  const LoadResult r = LoadCorpus(root);
  const CorpusSplit *train = r.Split("train"), *test = r.Split("test");
  if (!train || !test) return Fail("train/test split missing");
  const Histogram te = DistributionReport(*test, Granularity::kSentence, Aspect::kCompleteness,
                                          {0, 8, 10});
  const Histogram tr = DistributionReport(*train, Granularity::kSentence, Aspect::kCompleteness,
                                          {5, 8});
  const std::string d = "train " + std::to_string(train->size()) + ", test " +
                        std::to_string(test->size()) + ", test completeness <8: " +
                        std::to_string(te.counts[0]) + ", train in [5,8]: " +
                        std::to_string(tr.counts[0]);
  return train->size() == 2500 && test->size() == 2500 && te.counts[0] == 14 &&
                 tr.counts[0] == 8
             ? Pass(d)
             : Fail(d);
}

Outcome RaterQcStraddle() {
  struct Case {
    double sentence_pcc, word_scc;
    const char *metric;
    bool flagged;
  };
  const Case cases[] = {{0.55, 1.0, "sentence_pcc", true},
                        {0.65, 1.0, "sentence_pcc", false},
                        {1.0, 0.45, "word_scc", true},
                        {1.0, 0.55, "word_scc", false}};
  std::string d;
  for (const Case &c : cases) {
    const QcReport r = RaterQc(testing::StraddleQcFixture(c.sentence_pcc, c.word_scc));
    for (const RaterPairResult &p : r.pairs) {
      const bool against5 = p.rater_b == "r5" || p.rater_a == "r5";
      const double got = std::string(c.metric) == "sentence_pcc" ? *p.sentence_pcc.value
                                                                  : *p.word_scc.value;
      const double want = against5 ? (c.sentence_pcc < 1 ? c.sentence_pcc : c.word_scc) : 1.0;
      if (std::abs(got - want) > kQcTol)
        return Fail(std::string(c.metric) + " fixture value " + Num(got, "%.6f"));
      const bool should = against5 && c.flagged;
      if (p.flags.size() != (should ? 1u : 0u) ||
          (should && p.flags[0].rfind(std::string(c.metric) + " ", 0) != 0))
        return Fail(p.rater_a + "/" + p.rater_b + " flags wrong at " + Num(want));
    }
    if (r.passed() == c.flagged) return Fail("overall verdict wrong at " + Num(c.sentence_pcc));
  }
  return Pass("sentence PCC 0.55 flagged, 0.65 passed; word SCC 0.45 flagged, 0.55 passed");
}

// ------------------------------------------------------------ end to end

Outcome EndToEnd() {
  namespace fs = std::filesystem;
  const fs::path dir = testing::TempDir("acceptance_e2e");
  std::ostringstream out, err;
  auto run = [&](std::vector<std::string> args) {
    out.str("");
    err.str("");
    return RunCli(args, out, err);
  };
  if (run({"ingest", "--root", (testing::DataDir() / "mini_corpus").string(), "--out",
           (dir / "corpus").string()}))
    return Fail("ingest: " + err.str());
  const fs::path gold = dir / "corpus" / "test.jsonl";
  const TaskSpec full = TaskSpec::Full();
  std::map<std::string, std::string> answers;
  for (const auto &a : ReadCorpusFile(gold))
    answers[a.utterance_id] = Serialize(FromAnnotation(a, full), full);
  testing::MockEndpoint ep([&](const Json &req, int) {
    return HttpReply{200, Json{{"text", answers.at(req["utterance_id"].get<std::string>())}}.dump()};
  });
  if (run({"render-prompts", "--corpus", gold.string(), "--out", (dir / "prompts.jsonl").string()}))
    return Fail("render-prompts: " + err.str());
  if (run({"infer", "--prompts", (dir / "prompts.jsonl").string(), "--out",
           (dir / "records.jsonl").string(), "--endpoint", ep.url(), "--rps", "50"}))
    return Fail("infer: " + err.str());
  if (run({"parse", "--records", (dir / "records.jsonl").string(), "--out",
           (dir / "pred.jsonl").string()}))
    return Fail("parse: " + err.str());
  if (run({"score", "--pred", (dir / "pred.jsonl").string(), "--gold", gold.string(), "--out",
           (dir / "report.json").string()}))
    return Fail("score: " + err.str());
  std::ifstream in(dir / "report.json");
  const MetricReport rep = ReportFromJson(Json::parse(in));
  if (rep.used != answers.size()) return Fail("used " + std::to_string(rep.used));
  for (const MetricCell &c : rep.cells) {
    const std::string name =
        std::string(ToString(c.granularity)) + " " + std::string(ToString(c.aspect));
    if (!c.pcc.defined() || !c.scc.defined() || !c.rmse.defined())
      return Fail(name + " undefined");
    if (std::abs(*c.pcc.value - 1) > kSmokeTol || std::abs(*c.scc.value - 1) > kSmokeTol ||
        std::abs(*c.rmse.value) > kSmokeTol)
      return Fail(name + " not perfect");
  }
  return Pass(std::to_string(rep.cells.size()) + " cells with PCC = SCC = 1, RMSE = 0 over " +
              std::to_string(rep.used) + " utterances");
}

struct Criterion {
  const char *name;
  double budget_s;  // 0: none
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace apa

int main() {
  using namespace apa;
  const std::vector<Criterion> criteria = {
      {"metric-oracle-equivalence", 5, MetricOracle},
      {"scc-identity", 0, SccIdentity},
      {"degenerate-variance", 0, DegenerateVariance},
      {"simpo-analytics", 0, SimpoAnalytics},
      {"gradient-check", 30, GradientCheck},
      {"toy-training", 60, ToyTraining},
      {"parser-roundtrip-fuzz", 0, ParserRoundTripFuzz},
      {"pair-invariants", 0, PairInvariants},
      {"rescale-law", 0, RescaleLaw},
      {"corpus-facts", 0, CorpusFacts},
      {"rater-qc-straddle", 0, RaterQcStraddle},
      {"end-to-end-smoke", 10, EndToEnd},
  };
  int failed = 0;
  for (const Criterion &c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {Status::kFail, std::string("threw: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.status == Status::kPass && c.budget_s > 0 && s > c.budget_s) {
      o.status = Status::kFail;
      o.detail += "; over the " + Num(c.budget_s, "%.0f") + " s budget";
    }
    const char *tag = o.status == Status::kPass ? "PASS" : o.status == Status::kFail ? "FAIL" : "SKIP";
    std::printf("%s  %-26s %s (%.2f s)\n", tag, c.name, o.detail.c_str(), s);
    std::fflush(stdout);
    failed += o.status == Status::kFail;
  }
  std::printf("%d criteria, %d failed\n", static_cast<int>(criteria.size()), failed);
  return failed ? 1 : 0;
}
