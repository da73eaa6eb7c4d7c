// core/include/apa/metrics.h

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

#ifndef APA_METRICS_H_
#define APA_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apa/scorekit.h"

namespace apa {

enum class UndefinedReason { kZeroVarianceGold, kZeroVariancePred, kTooFewSamples };

std::string_view ToString(UndefinedReason r);

// A metric result. Undefined values carry the reason instead of a NaN.
struct MetricValue {
  std::optional<double> value;
  std::size_t n = 0;
  std::optional<UndefinedReason> reason;

  bool defined() const { return value.has_value(); }
  static MetricValue Defined(double v, std::size_t n);
  static MetricValue Undefined(UndefinedReason r, std::size_t n);
};

struct PairedSeries {
  std::vector<double> predictions;
  std::vector<double> gold;
  Granularity granularity = Granularity::kSentence;
  Aspect aspect = Aspect::kTotal;
};

// Sample Pearson correlation. Undefined for n < 2 or a constant series.
// Throws InvalidArgument on length mismatch or non-finite input.
MetricValue Pcc(std::span<const double> pred, std::span<const double> gold);
// Spearman correlation: Pearson over average (fractional) ranks.
MetricValue Scc(std::span<const double> pred, std::span<const double> gold);
// Root mean squared error; defined whenever n >= 1.
MetricValue Rmse(std::span<const double> pred, std::span<const double> gold);

inline MetricValue Pcc(const PairedSeries &s) { return Pcc(s.predictions, s.gold); }
inline MetricValue Scc(const PairedSeries &s) { return Scc(s.predictions, s.gold); }
inline MetricValue Rmse(const PairedSeries &s) { return Rmse(s.predictions, s.gold); }

// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> AverageRanks(std::span<const double> v);

}  // namespace apa

#endif  // APA_METRICS_H_
