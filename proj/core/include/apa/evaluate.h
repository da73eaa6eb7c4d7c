// core/include/apa/evaluate.h

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

#ifndef APA_EVALUATE_H_
#define APA_EVALUATE_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apa/json_io.h"
#include "apa/metrics.h"
#include "apa/respparse.h"
#include "apa/task_spec.h"

namespace apa {

// One line of a parsed-response file: either a response or the reason it
// could not be obtained.
struct PredictionRecord {
  std::string utterance_id;
  std::optional<AssessmentResponse> response;
  std::string error;  // set iff !response
};

// {utterance_id, response} or {utterance_id, error}
Json ToJson(const PredictionRecord &p);
PredictionRecord PredictionFromJson(const Json &j);

// kStrict drops utterances whose words or phones do not match the reference
// token by token; kLenient only requires the counts to agree.
enum class AlignmentPolicy { kStrict, kLenient };

struct EvaluateOptions {
  PhoneScale phone_rmse_scale = PhoneScale::kNative;
  AlignmentPolicy alignment = AlignmentPolicy::kStrict;
};

struct MetricCell {
  Granularity granularity = Granularity::kSentence;
  Aspect aspect = Aspect::kTotal;
  MetricValue pcc;
  MetricValue scc;
  MetricValue rmse;
};

struct MetricReport {
  TaskSpec task;
  std::vector<MetricCell> cells;  // canonical task order
  PhoneScale phone_rmse_scale = PhoneScale::kNative;
  std::size_t predictions = 0;
  std::size_t used = 0;
  std::map<std::string, std::size_t> excluded;  // reason -> utterances
  std::size_t gold_without_prediction = 0;

  const MetricCell *Find(Granularity g, Aspect a) const;
};

// Pools sentence scores per utterance and word and phone scores across all
// utterances, then computes every cell `task` asks for. Exclusion reasons:
// "parse-error", "unknown-utterance", "duplicate", "incomplete",
// "alignment", "missing-gold-phones". Throws Error("metrics") when no
// utterance is usable.
MetricReport Evaluate(const std::vector<PredictionRecord> &predictions,
                      const std::vector<UtteranceAnnotation> &gold,
                      const TaskSpec &task, const EvaluateOptions &options = {});

enum class ReportFormat { kText, kJson };

// Text: one header block and one row laid out like a results table, cells
// "PCC / SCC" to two decimals, "-" when undefined. Phone RMSE gets its own
// column. Json: every cell with value, n and undefined reason.
std::string RenderReport(const MetricReport &r, ReportFormat format,
                         const std::string &row_label = "model");

Json ReportToJson(const MetricReport &r);
// Inverse of ReportToJson. Throws Error("metrics") on malformed input.
MetricReport ReportFromJson(const Json &j);

}  // namespace apa

#endif  // APA_EVALUATE_H_
