// core/src/metrics.cc

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

#include "apa/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "apa/error.h"

namespace apa {

namespace {

void CheckInputs(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() != gold.size())
    throw InvalidArgument("metrics",
                          "series length mismatch: " +
                              std::to_string(pred.size()) + " predictions vs " +
                              std::to_string(gold.size()) + " gold");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(pred.begin(), pred.end(), finite) ||
      !std::all_of(gold.begin(), gold.end(), finite))
    throw InvalidArgument("metrics", "series contains non-finite values");
}

bool IsConstant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
}

double Mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::string_view ToString(UndefinedReason r) {
  switch (r) {
    case UndefinedReason::kZeroVarianceGold: return "zero-variance-gold";
    case UndefinedReason::kZeroVariancePred: return "zero-variance-pred";
    case UndefinedReason::kTooFewSamples: return "n<2";
  }
  return "?";
}

MetricValue MetricValue::Defined(double v, std::size_t n) {
  MetricValue m;
  m.value = v;
  m.n = n;
  return m;
}

MetricValue MetricValue::Undefined(UndefinedReason r, std::size_t n) {
  MetricValue m;
  m.n = n;
  m.reason = r;
  return m;
}

MetricValue Pcc(std::span<const double> pred, std::span<const double> gold) {
  CheckInputs(pred, gold);
  const std::size_t n = pred.size();
  if (n < 2) return MetricValue::Undefined(UndefinedReason::kTooFewSamples, n);
  // Exact constancy test: a tiny computed variance would not catch it.
  if (IsConstant(gold))
    return MetricValue::Undefined(UndefinedReason::kZeroVarianceGold, n);
  if (IsConstant(pred))
    return MetricValue::Undefined(UndefinedReason::kZeroVariancePred, n);

  const double mp = Mean(pred), mg = Mean(gold);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dp = pred[i] - mp, dg = gold[i] - mg;
    sxy += dp * dg;
    sxx += dp * dp;
    syy += dg * dg;
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return MetricValue::Defined(std::clamp(r, -1.0, 1.0), n);
}

std::vector<double> AverageRanks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && v[order[j]] == v[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

MetricValue Scc(std::span<const double> pred, std::span<const double> gold) {
  CheckInputs(pred, gold);
  const auto rp = AverageRanks(pred);
  const auto rg = AverageRanks(gold);
  return Pcc(rp, rg);
}

MetricValue Rmse(std::span<const double> pred, std::span<const double> gold) {
  CheckInputs(pred, gold);
  const std::size_t n = pred.size();
  if (n == 0) return MetricValue::Undefined(UndefinedReason::kTooFewSamples, 0);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred[i] - gold[i];
    s += d * d;
  }
  return MetricValue::Defined(std::sqrt(s / static_cast<double>(n)), n);
}

}  // namespace apa
