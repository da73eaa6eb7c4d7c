// tools/apa_cli.cc

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

#include "apa_cli.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

#include "apa/corpus.h"
#include "apa/evaluate.h"
#include "apa/inference.h"
#include "apa/json_io.h"
#include "apa/prefsim.h"
#include "apa/promptgen.h"
#include "apa/respparse.h"
#include "apa/simpo.h"
#include "apa/task_spec.h"
#include "apa/text_util.h"

namespace apa {

namespace {

namespace fs = std::filesystem;

std::string Sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2g", v);
  return buf;
}

std::string Fixed(double v, int d) { return FormatFixed(v, d); }

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string root;
  std::string out;
  std::string schema;
  std::string histogram;
  std::string edges = "0,2,4,6,8,10";
};

int Ingest(const IngestArgs &a, std::ostream &out, std::ostream &err) {
  const SchemaDescriptor schema = a.schema.empty() ? SchemaDescriptor{}
                                                   : SchemaDescriptor::Load(a.schema);
  const LoadResult r = LoadCorpus(a.root, schema);
  fs::create_directories(a.out);
  for (const CorpusSplit &s : r.splits) {
    WriteCorpusFile(fs::path(a.out) / (s.name + ".jsonl"), s.utterances);
    out << s.name << ": " << s.size() << " utterances, " << s.speaker_index.size()
        << " speakers\n";
  }
  JsonLinesWriter q(fs::path(a.out) / "quarantine.jsonl", "quarantine");
  for (const QuarantineEntry &e : r.quarantine) {
    Json v = Json::array();
    for (const Violation &x : e.violations) v.push_back({{"field", x.field}, {"message", x.message}});
    q.Write({{"utterance_id", e.utterance_id}, {"violations", v}});
    err << "quarantined " << e.utterance_id << ": " << e.violations.front().field << ": "
        << e.violations.front().message << '\n';
  }
  out << "records: " << r.record_count << ", quarantined: " << r.quarantine.size()
      << ", unassigned: " << r.unassigned.size() << '\n';
  if (!a.histogram.empty()) {
    const PerturbTarget t = PerturbTarget::Parse(a.histogram);
    std::vector<double> edges;
    for (const std::string &e : Split(a.edges, ',')) edges.push_back(std::stod(e));
    for (const CorpusSplit &s : r.splits) {
      const Histogram h = DistributionReport(s, t.granularity, t.aspect, edges);
      out << s.name << ' ' << t.ToString() << " histogram (n=" << h.total << ")\n";
      for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const bool last = i + 1 == h.counts.size();
        out << "  [" << Fixed(h.edges[i], 1) << ", " << Fixed(h.edges[i + 1], 1)
            << (last ? "]" : ")") << ' ' << h.counts[i] << '\n';
      }
      if (h.below || h.above) out << "  outside: " << h.below << " below, " << h.above << " above\n";
    }
  }
  return kExitOk;
}

// -------------------------------------------------------------- rater-qc

struct QcArgs {
  std::string raters;
  std::string average_out;
  QcThresholds t;
  bool non_strict = false;
};

int RaterQcVerb(const QcArgs &a, std::ostream &out, std::ostream &) {
  std::map<std::string, RaterAnnotationSet> sets;
  for (const Json &j : ReadJsonLines(a.raters)) {
    if (!j.contains("rater") || !j["rater"].is_string())
      throw Error("corpus", "rater record without a 'rater' field");
    UtteranceAnnotation ann = AnnotationFromJson(j);
    RaterAnnotationSet &s = sets[ann.utterance_id];
    s.utterance_id = ann.utterance_id;
    if (!s.raters.emplace(j["rater"].get<std::string>(), std::move(ann)).second)
      throw Error("corpus", "duplicate rater record for " + s.utterance_id);
  }
  std::vector<RaterAnnotationSet> v;
  for (auto &[id, s] : sets) v.push_back(std::move(s));
  QcThresholds t = a.t;
  t.strict = !a.non_strict;
  const QcReport rep = RaterQc(v, t);
  auto cell = [](const MetricValue &m) { return m.defined() ? Fixed(*m.value, 3) : std::string("-"); };
  out << "rater pair       sent PCC  sent SCC  word PCC  word SCC  status\n";
  for (const RaterPairResult &p : rep.pairs) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-16s %-9s %-9s %-9s %-9s %s\n",
                  (p.rater_a + "/" + p.rater_b).c_str(), cell(p.sentence_pcc).c_str(),
                  cell(p.sentence_scc).c_str(), cell(p.word_pcc).c_str(), cell(p.word_scc).c_str(),
                  p.passed() ? "ok" : "FLAGGED");
    out << buf;
    for (const std::string &f : p.flags) out << "  " << f << '\n';
  }
  out << "utterances: " << rep.utterances << "\noverall: " << (rep.passed() ? "PASS" : "FAIL") << '\n';
  if (!a.average_out.empty()) {
    std::vector<UtteranceAnnotation> avg;
    for (const RaterAnnotationSet &s : v) avg.push_back(AverageRaters(s));
    WriteCorpusFile(a.average_out, avg);
  }
  return kExitOk;
}

// --------------------------------------------------------- render-prompts

struct RenderArgs {
  std::string corpus;
  std::string task = "full";
  std::string tmpl;
  std::string out;
  std::string save_template;
};

int RenderPrompts(const RenderArgs &a, std::ostream &out, std::ostream &) {
  const TaskSpec task = TaskSpec::Parse(a.task);
  const PromptTemplate tmpl = a.tmpl.empty() ? BuildTemplate(task) : LoadTemplate(a.tmpl);
  if (!a.save_template.empty()) SaveTemplate(tmpl, a.save_template);
  JsonLinesWriter w(a.out, "prompts");
  for (const UtteranceAnnotation &u : ReadCorpusFile(a.corpus)) {
    const RenderedPrompt p = Render(tmpl, u, task);
    w.Write({{"utterance_id", u.utterance_id},
             {"template_version", p.template_version},
             {"task", task.ToString()},
             {"prompt", p.text},
             {"audio_path", u.audio_path}});
  }
  out << "rendered " << w.records() << " prompts (" << tmpl.version << ")\n";
  return kExitOk;
}

// ------------------------------------------------------------------ infer

struct InferArgs {
  std::string prompts;
  std::string out;
  EndpointConfig endpoint;
  bool url_audio = false;
  bool dry_run = false;
  bool resume = false;
};

int Infer(InferArgs a, std::ostream &out, std::ostream &err) {
  a.endpoint.inline_audio = !a.url_audio;
  if (a.dry_run && a.endpoint.url.empty()) a.endpoint.url = "http://dry-run.invalid/";
  a.endpoint.Validate();
  std::vector<InferenceInput> inputs;
  for (const Json &j : ReadJsonLines(a.prompts))
    inputs.push_back({j.at("utterance_id").get<std::string>(), j.at("prompt").get<std::string>(),
                      j.value("audio_path", "")});
  std::unique_ptr<Transport> transport;
  if (!a.dry_run) transport = MakeHttpTransport(a.endpoint.url);
  std::vector<InferenceRecord> records;
  std::size_t skipped = 0;
  if (a.resume) {
    ResumeResult r = Resume(a.out, inputs, a.endpoint, transport.get(), a.dry_run);
    for (const std::string &w : r.warnings) err << "warning: " << w << '\n';
    records = std::move(r.records);
    skipped = r.already_done;
  } else {
    JsonLinesWriter w(a.out, "inference-records");
    records = SubmitBatch(inputs, a.endpoint, transport.get(),
                          [&](const InferenceRecord &r) { w.Write(ToJson(r)); }, a.dry_run);
  }
  std::size_t ok = 0;
  for (const InferenceRecord &r : records) {
    if (r.response) ++ok;
    if (r.error) err << r.utterance_id << ": " << *r.error << '\n';
  }
  out << "submitted " << records.size() << ", succeeded " << ok << ", failed "
      << records.size() - ok << ", already done " << skipped << (a.dry_run ? " (dry run)" : "")
      << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------ parse

struct ParseArgs {
  std::string records;
  std::string task = "full";
  std::string out;
  bool lenient = false;
};

int ParseVerb(const ParseArgs &a, std::ostream &out, std::ostream &err) {
  const TaskSpec task = TaskSpec::Parse(a.task);
  std::vector<JsonLinesIssue> issues;
  const auto records = ReadJsonLines(a.records, &issues);
  for (const JsonLinesIssue &i : issues) err << "warning: " << i.message << " (skipped)\n";
  JsonLinesWriter w(a.out, "predictions");
  std::size_t ok = 0, failed = 0;
  for (const Json &j : records) {
    PredictionRecord p;
    try {
      const InferenceRecord r = InferenceRecordFromJson(j);
      p.utterance_id = r.utterance_id;
      if (r.dry_run) {
        p.error = "dry-run record";
      } else if (r.error) {
        p.error = "inference: " + *r.error;
      } else {
        ParseResult pr = Parse(*r.response, task, a.lenient ? ParseMode::kLenient : ParseMode::kStrict);
        for (const ParseWarning &wa : pr.warnings)
          err << r.utterance_id << ':' << wa.line << ':' << wa.column << ": warning: " << wa.message << '\n';
        p.response = std::move(pr.response);
      }
    } catch (const ParseError &e) {
      p.error = std::string("respparse: ") + e.what();
    } catch (const Error &e) {
      if (p.utterance_id.empty()) {
        err << "warning: skipped record: " << e.what() << '\n';
        continue;
      }
      p.error = e.module() + ": " + e.what();
    }
    if (p.response) ++ok;
    else {
      ++failed;
      err << p.utterance_id << ": " << p.error << '\n';
    }
    w.Write(ToJson(p));
  }
  out << "parsed " << ok << ", failed " << failed << '\n';
  return kExitOk;
}

// -------------------------------------------------------------- gen-pairs

struct GenArgs {
  std::string corpus;
  std::string task = "full";
  std::string target = "sentence:accuracy";
  std::string out;
  std::size_t per_utterance = 1;
  double delta_min = 2.0;
  double delta_max = 4.0;
  std::string direction = "random";
  std::string mode = "gold-chosen";
  std::size_t threads = 1;
  std::uint64_t seed = 0;
};

int GenPairs(const GenArgs &a, std::ostream &out, std::ostream &) {
  const TaskSpec task = TaskSpec::Parse(a.task);
  PerturbConfig c;
  c.delta_min = a.delta_min;
  c.delta_max = a.delta_max;
  c.target = PerturbTarget::Parse(a.target);
  c.seed = a.seed;
  if (a.direction == "random") c.direction = DirectionPolicy::kRandom;
  else if (a.direction == "increase") c.direction = DirectionPolicy::kIncrease;
  else if (a.direction == "decrease") c.direction = DirectionPolicy::kDecrease;
  else throw InvalidArgument("prefsim", "unknown direction '" + a.direction + "'");
  if (a.mode == "gold-chosen") c.mode = PairMode::kGoldChosen;
  else if (a.mode == "both-perturbed") c.mode = PairMode::kBothPerturbed;
  else throw InvalidArgument("prefsim", "unknown pair mode '" + a.mode + "'");
  c.Validate(&task);
  CorpusSplit split;
  split.name = fs::path(a.corpus).stem().string();
  split.utterances = ReadCorpusFile(a.corpus);
  const PairDataset d = GenerateDataset(split, task, c, a.per_utterance, a.threads);
  JsonLinesWriter w(a.out, "preference-pairs", a.seed);
  for (const PreferencePair &p : d.pairs) {
    Json j = PairToJson(p, task);
    j["task"] = task.ToString();
    w.Write(j);
  }
  out << "pairs: " << d.pairs.size() << " from " << d.utterances << " utterances; skipped "
      << d.skipped_missing_target << " without target, " << d.skipped_degenerate
      << " degenerate draws\n";
  return kExitOk;
}

// ------------------------------------------------------------- grad-check

struct GradArgs {
  std::uint64_t seed = 0;
  std::size_t configs = 100;
  double tolerance = 1e-5;
  double h = 1e-5;
};

int GradCheck(const GradArgs &a, std::ostream &out, std::ostream &) {
  std::mt19937_64 rng(a.seed);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * Uniform01(rng); };
  double worst = 0.0;
  for (std::size_t k = 0; k < a.configs; ++k) {
    const std::size_t vocab = 2 + rng() % 7;
    ToyScorer s = ToyScorer::Random(vocab, rng, uniform(0.1, 2.0));
    std::vector<PreferenceExample> batch(1 + rng() % 4);
    for (PreferenceExample &ex : batch) {
      for (TokenSeq *seq : {&ex.chosen, &ex.rejected}) {
        seq->resize(1 + rng() % 32);
        for (int &t : *seq) t = static_cast<int>(rng() % vocab);
      }
    }
    const SimpoConfig c{uniform(0.01, 2.0), uniform(0.0, 2.0), uniform(0.0, 1.0)};
    worst = std::max(worst, CheckGradient(batch, s, c, a.h).max_rel_error);
  }
  const bool pass = worst < a.tolerance;
  out << "max rel err " << Sci(worst) << ' ' << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kExitOk : kExitModuleError;
}

// -------------------------------------------------------------- train-toy

struct TrainArgs {
  std::string pairs;
  std::size_t synthetic = 64;
  std::size_t vocab = 8;
  std::size_t steps = 2000;
  double lr = 1.0;
  SimpoConfig c;
  std::string trace;
  std::uint64_t seed = 0;
};

int TrainToyVerb(const TrainArgs &a, std::ostream &out, std::ostream &) {
  std::mt19937_64 rng(a.seed);
  std::vector<PreferenceExample> pairs;
  std::size_t vocab = a.vocab;
  if (!a.pairs.empty()) {
    const CharTokenizer tok;
    vocab = tok.vocab_size();
    for (const Json &j : ReadJsonLines(a.pairs))
      pairs.push_back({tok.Encode(j.at("chosen").get<std::string>()),
                       tok.Encode(j.at("rejected").get<std::string>())});
  } else {
    pairs = SyntheticPairs(a.synthetic, vocab, rng);
  }
  ToyScorer scorer(vocab);
  const auto trace = TrainToy(pairs, scorer, a.c, a.steps, a.lr);
  if (!a.trace.empty()) {
    std::ofstream f(a.trace);
    if (!f) throw Error("simpo", "cannot write " + a.trace);
    f << TraceCsv(trace);
  }
  const TraceRow &first = trace.front(), &last = trace.back();
  out << "pairs " << pairs.size() << ", vocab " << vocab << ", steps " << a.steps << '\n'
      << "loss " << Fixed(first.total, 6) << " -> " << Fixed(last.total, 6) << '\n'
      << "mean reward gap " << Fixed(first.mean_gap, 4) << " -> " << Fixed(last.mean_gap, 4)
      << " (margin " << Fixed(a.c.gamma, 2) << ")\n";
  return kExitOk;
}

// ------------------------------------------------------------ score/report

struct ScoreArgs {
  std::string pred;
  std::string gold;
  std::string task = "full";
  bool json = false;
  std::string out;
  std::string phone_rmse_scale = "native";
  std::string alignment = "strict";
  std::string label = "model";
};

int Score(const ScoreArgs &a, std::ostream &out, std::ostream &err) {
  const TaskSpec task = TaskSpec::Parse(a.task);
  EvaluateOptions o;
  if (a.phone_rmse_scale == "native") o.phone_rmse_scale = PhoneScale::kNative;
  else if (a.phone_rmse_scale == "rescaled") o.phone_rmse_scale = PhoneScale::kRescaled;
  else throw InvalidArgument("metrics", "phone RMSE scale must be native or rescaled");
  if (a.alignment == "strict") o.alignment = AlignmentPolicy::kStrict;
  else if (a.alignment == "lenient") o.alignment = AlignmentPolicy::kLenient;
  else throw InvalidArgument("metrics", "alignment policy must be strict or lenient");
  std::vector<JsonLinesIssue> issues;
  std::vector<PredictionRecord> preds;
  for (const Json &j : ReadJsonLines(a.pred, &issues)) preds.push_back(PredictionFromJson(j));
  for (const JsonLinesIssue &i : issues) err << "warning: " << i.message << " (skipped)\n";
  const MetricReport r = Evaluate(preds, ReadCorpusFile(a.gold), task, o);
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    if (!f) throw Error("metrics", "cannot write " + a.out);
    f << ReportToJson(r).dump(2) << '\n';
  }
  out << RenderReport(r, a.json ? ReportFormat::kJson : ReportFormat::kText, a.label);
  return kExitOk;
}

struct ReportArgs {
  std::string in;
  bool json = false;
  std::string label = "model";
};

int Report(const ReportArgs &a, std::ostream &out, std::ostream &) {
  std::ifstream f(a.in);
  if (!f) throw Error("metrics", "cannot open " + a.in);
  const Json j = Json::parse(f, nullptr, false);
  if (j.is_discarded()) throw Error("metrics", a.in + " is not JSON");
  out << RenderReport(ReportFromJson(j), a.json ? ReportFormat::kJson : ReportFormat::kText,
                      a.label);
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Pronunciation assessment toolkit: corpus ingestion, prompts, parsing, "
               "preference pairs, loss checks and scoring."};
  app.name("apa");
  app.set_version_flag("--version", std::string(kToolVersion));
  app.set_config("--config", "", "key = value file; flags given on the command line win");
  app.require_subcommand(1);

  IngestArgs ingest;
  auto *c = app.add_subcommand("ingest", "Load a scored corpus and write one JSON-Lines file per split");
  c->add_option("--root", ingest.root, "Corpus root")->required()->check(CLI::ExistingDirectory);
  c->add_option("--out", ingest.out, "Output directory")->required();
  c->add_option("--schema", ingest.schema, "Schema descriptor (key = value)")->check(CLI::ExistingFile);
  c->add_option("--histogram", ingest.histogram, "Print a histogram, e.g. sentence:completeness");
  c->add_option("--edges", ingest.edges, "Histogram bucket edges")->capture_default_str();

  QcArgs qc;
  auto *q = app.add_subcommand("rater-qc", "Pairwise inter-rater agreement check");
  q->add_option("--raters", qc.raters, "Rater annotations (JSON-Lines, with a 'rater' field)")
      ->required()->check(CLI::ExistingFile);
  q->add_option("--sentence-pcc", qc.t.sentence_pcc_min, "Sentence PCC threshold")->capture_default_str();
  q->add_option("--sentence-scc", qc.t.sentence_scc_min, "Sentence SCC threshold")->capture_default_str();
  q->add_option("--word-pcc", qc.t.word_pcc_min, "Word PCC threshold")->capture_default_str();
  q->add_option("--word-scc", qc.t.word_scc_min, "Word SCC threshold")->capture_default_str();
  q->add_flag("--non-strict", qc.non_strict, "Treat values equal to a threshold as passing");
  q->add_option("--average-out", qc.average_out, "Write the rater-averaged corpus here");

  RenderArgs render;
  auto *r = app.add_subcommand("render-prompts", "Render one prompt per corpus utterance");
  r->add_option("--corpus", render.corpus, "Corpus JSON-Lines file")->required()->check(CLI::ExistingFile);
  r->add_option("--task", render.task, "Task spec, e.g. full or sentence:accuracy;word")->capture_default_str();
  r->add_option("--template", render.tmpl, "Template file instead of the built-in one")
      ->check(CLI::ExistingFile);
  r->add_option("--save-template", render.save_template, "Also write the template used");
  r->add_option("--out", render.out, "Output JSON-Lines file")->required();

  InferArgs infer;
  auto *i = app.add_subcommand("infer", "Send prompts to a scoring endpoint");
  i->add_option("--prompts", infer.prompts, "Prompt file from render-prompts")
      ->required()->check(CLI::ExistingFile);
  i->add_option("--out", infer.out, "Record file (JSON-Lines)")->required();
  i->add_option("--endpoint", infer.endpoint.url, "Endpoint URL");
  i->add_option("--auth-env", infer.endpoint.auth_env, "Environment variable with a bearer token");
  i->add_option("--timeout", infer.endpoint.timeout_s, "Request timeout in seconds")->capture_default_str();
  i->add_option("--retries", infer.endpoint.max_retries, "Retries on transient failures")->capture_default_str();
  i->add_option("--backoff", infer.endpoint.backoff_s, "First retry delay in seconds")->capture_default_str();
  i->add_option("--rps", infer.endpoint.requests_per_second, "Request rate cap")->capture_default_str();
  i->add_option("--in-flight", infer.endpoint.max_in_flight, "Concurrent requests")->capture_default_str();
  i->add_option("--field", infer.endpoint.response_field, "Dotted path of the reply text")->capture_default_str();
  i->add_flag("--url-audio", infer.url_audio, "Send audio paths instead of base64 bytes");
  i->add_flag("--dry-run", infer.dry_run, "Write records without contacting the endpoint");
  i->add_flag("--resume", infer.resume, "Only submit prompts without a successful record");

  ParseArgs parse;
  auto *p = app.add_subcommand("parse", "Parse raw model responses into scores");
  p->add_option("--records", parse.records, "Record file from infer")->required()->check(CLI::ExistingFile);
  p->add_option("--task", parse.task, "Task spec the prompts asked for")->capture_default_str();
  p->add_option("--out", parse.out, "Prediction file (JSON-Lines)")->required();
  p->add_flag("--lenient", parse.lenient, "Tolerate extra text and out-of-order sections");

  GenArgs gen;
  auto *g = app.add_subcommand("gen-pairs", "Synthesise preference pairs by perturbing gold scores");
  g->add_option("--corpus", gen.corpus, "Corpus JSON-Lines file")->required()->check(CLI::ExistingFile);
  g->add_option("--task", gen.task, "Task spec")->capture_default_str();
  g->add_option("--target", gen.target, "Score to perturb, e.g. word:accuracy")->capture_default_str();
  g->add_option("--out", gen.out, "Pair file (JSON-Lines)")->required();
  g->add_option("--per-utterance", gen.per_utterance, "Pairs per utterance")->capture_default_str();
  g->add_option("--delta-min", gen.delta_min, "Smallest perturbation")->capture_default_str();
  g->add_option("--delta-max", gen.delta_max, "Largest perturbation")->capture_default_str();
  g->add_option("--direction", gen.direction, "random, increase or decrease")->capture_default_str();
  g->add_option("--mode", gen.mode, "gold-chosen or both-perturbed")->capture_default_str();
  g->add_option("--threads", gen.threads, "Worker threads")->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();

  GradArgs grad;
  auto *gc = app.add_subcommand("grad-check", "Check the loss gradient against finite differences");
  gc->add_option("--seed", grad.seed, "Random seed")->capture_default_str();
  gc->add_option("--configs", grad.configs, "Random toy configurations")->capture_default_str();
  gc->add_option("--tolerance", grad.tolerance, "Largest acceptable relative error")->capture_default_str();
  gc->add_option("--step", grad.h, "Finite-difference step")->capture_default_str();

  TrainArgs train;
  auto *t = app.add_subcommand("train-toy", "Train the toy bigram scorer on preference pairs");
  t->add_option("--pairs", train.pairs, "Pair file from gen-pairs (character tokens)")
      ->check(CLI::ExistingFile);
  t->add_option("--synthetic", train.synthetic, "Synthetic pairs when no file is given")->capture_default_str();
  t->add_option("--vocab", train.vocab, "Vocabulary of the synthetic pairs")->capture_default_str();
  t->add_option("--steps", train.steps, "Gradient steps")->capture_default_str();
  t->add_option("--lr", train.lr, "Learning rate")->capture_default_str();
  t->add_option("--beta", train.c.beta, "Preference sharpness")->capture_default_str();
  t->add_option("--gamma", train.c.gamma, "Reward margin")->capture_default_str();
  t->add_option("--lambda", train.c.lambda, "Cross-entropy weight")->capture_default_str();
  t->add_option("--trace", train.trace, "Write the loss trace as CSV");
  t->add_option("--seed", train.seed, "Random seed")->capture_default_str();

  ScoreArgs score;
  auto *s = app.add_subcommand("score", "Compare predictions with gold scores");
  s->add_option("--pred", score.pred, "Prediction file from parse")->required()->check(CLI::ExistingFile);
  s->add_option("--gold", score.gold, "Gold corpus file")->required()->check(CLI::ExistingFile);
  s->add_option("--task", score.task, "Task spec")->capture_default_str();
  s->add_flag("--json", score.json, "Print the machine-readable report");
  s->add_option("--out", score.out, "Also save the JSON report here");
  s->add_option("--phone-rmse-scale", score.phone_rmse_scale, "native or rescaled")->capture_default_str();
  s->add_option("--alignment", score.alignment, "strict or lenient")->capture_default_str();
  s->add_option("--label", score.label, "Row label")->capture_default_str();

  ReportArgs report;
  auto *rp = app.add_subcommand("report", "Render a saved JSON report");
  rp->add_option("--in", report.in, "Report from score --out")->required()->check(CLI::ExistingFile);
  rp->add_flag("--json", report.json, "Print JSON instead of the table");
  rp->add_option("--label", report.label, "Row label")->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::Success &e) {  // --help, --version
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (c->parsed()) return Ingest(ingest, out, err);
    if (q->parsed()) return RaterQcVerb(qc, out, err);
    if (r->parsed()) return RenderPrompts(render, out, err);
    if (i->parsed()) return Infer(infer, out, err);
    if (p->parsed()) return ParseVerb(parse, out, err);
    if (g->parsed()) return GenPairs(gen, out, err);
    if (gc->parsed()) return GradCheck(grad, out, err);
    if (t->parsed()) return TrainToyVerb(train, out, err);
    if (s->parsed()) return Score(score, out, err);
    if (rp->parsed()) return Report(report, out, err);
  } catch (const Error &e) {
    err << e.module() << ": " << e.what() << '\n';
    return kExitModuleError;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitModuleError;
  }
  return kExitUsage;
}

}  // namespace apa
