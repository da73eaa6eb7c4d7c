// core/src/simpo.cc

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

#include "apa/simpo.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apa/text_util.h"

namespace apa {

namespace {

double UnitDraw(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on our own uniform draws.
double NormalDraw(std::mt19937_64 &rng) {
  const double u1 = 1.0 - UnitDraw(rng);
  const double u2 = UnitDraw(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<double> LogSoftmaxRow(std::span<const double> row) {
  const double m = *std::max_element(row.begin(), row.end());
  double s = 0.0;
  for (double v : row) s += std::exp(v - m);
  const double lse = m + std::log(s);
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = row[j] - lse;
  return out;
}

}  // namespace

void SimpoConfig::Validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw InvalidArgument("simpo", "beta must be positive");
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw InvalidArgument("simpo", "gamma must be non-negative");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("simpo", "lambda must be non-negative");
}

double Reward(std::span<const double> token_logprobs) {
  if (token_logprobs.empty()) throw InvalidArgument("simpo", "reward of an empty response");
  double s = 0.0;
  for (double v : token_logprobs) s += v;
  return s / static_cast<double>(token_logprobs.size());
}

SequenceScore::SequenceScore(std::vector<double> token_logprobs)
    : logprobs_(std::move(token_logprobs)), reward_(Reward(logprobs_)) {
  for (double v : logprobs_)
    if (!(v <= 0.0)) throw InvalidArgument("simpo", "token log-probability must be <= 0");
}

double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double SimpoLoss(double r_pos, double r_neg, const SimpoConfig &c) {
  return Softplus(-c.beta * (r_pos - r_neg - c.gamma));
}

ToyScorer::ToyScorer(std::size_t vocab) : vocab_(vocab), theta_(vocab * vocab, 0.0) {
  if (vocab < 2) throw InvalidArgument("simpo", "toy scorer needs a vocabulary of at least 2");
}

ToyScorer ToyScorer::Random(std::size_t vocab, std::mt19937_64 &rng, double scale) {
  ToyScorer s(vocab);
  for (double &v : s.theta_) v = scale * NormalDraw(rng);
  return s;
}

void ToyScorer::CheckTokens(std::span<const int> tokens) const {
  if (tokens.empty()) throw InvalidArgument("simpo", "empty token sequence");
  for (int t : tokens)
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_)
      throw InvalidArgument("simpo", "token " + std::to_string(t) +
                                         " outside vocabulary of size " + std::to_string(vocab_));
}

std::vector<double> ToyScorer::Distribution(std::size_t from) const {
  auto lp = LogSoftmaxRow(std::span<const double>(theta_).subspan(from * vocab_, vocab_));
  for (double &v : lp) v = std::exp(v);
  return lp;
}

SequenceScore ToyScorer::Score(std::span<const int> tokens) const {
  CheckTokens(tokens);
  std::vector<double> lp;
  lp.reserve(tokens.size());
  std::size_t ctx = 0;
  for (int t : tokens) {
    const auto row = LogSoftmaxRow(std::span<const double>(theta_).subspan(ctx * vocab_, vocab_));
    lp.push_back(std::min(0.0, row[static_cast<std::size_t>(t)]));
    ctx = static_cast<std::size_t>(t);
  }
  return SequenceScore(std::move(lp));
}

void ToyScorer::AccumulateRewardGradient(std::span<const int> tokens, double weight,
                                         std::span<double> grad) const {
  CheckTokens(tokens);
  const double w = weight / static_cast<double>(tokens.size());
  std::size_t ctx = 0;
  for (int t : tokens) {
    const auto row = LogSoftmaxRow(std::span<const double>(theta_).subspan(ctx * vocab_, vocab_));
    double *g = grad.data() + ctx * vocab_;
    for (std::size_t j = 0; j < vocab_; ++j) g[j] -= w * std::exp(row[j]);
    g[static_cast<std::size_t>(t)] += w;
    ctx = static_cast<std::size_t>(t);
  }
}

long double ToyScorer::PreciseReward(std::span<const int> tokens) const {
  CheckTokens(tokens);
  long double sum = 0.0L;
  std::size_t ctx = 0;
  for (int t : tokens) {
    const double *row = theta_.data() + ctx * vocab_;
    long double m = row[0];
    for (std::size_t j = 1; j < vocab_; ++j) m = std::max<long double>(m, row[j]);
    long double z = 0.0L;
    for (std::size_t j = 0; j < vocab_; ++j) z += std::exp(static_cast<long double>(row[j]) - m);
    sum += static_cast<long double>(row[static_cast<std::size_t>(t)]) - m - std::log(z);
    ctx = static_cast<std::size_t>(t);
  }
  return sum / static_cast<long double>(tokens.size());
}

LossValue CombinedLoss(std::span<const PreferenceExample> batch, const SequenceScorer &scorer,
                       const SimpoConfig &c, bool with_gradient) {
  c.Validate();
  if (batch.empty()) throw InvalidArgument("simpo", "empty batch");
  LossValue out;
  if (with_gradient) out.gradient.assign(scorer.parameters().size(), 0.0);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const PreferenceExample &ex : batch) {
    const double rp = scorer.Score(ex.chosen).reward();
    const double rn = scorer.Score(ex.rejected).reward();
    const double z = -c.beta * (rp - rn - c.gamma);
    out.simpo += Softplus(z) * inv_b;
    out.ce += -rp * inv_b;
    out.mean_gap += (rp - rn) * inv_b;
    if (with_gradient) {
      const double s = Sigmoid(z);
      scorer.AccumulateRewardGradient(ex.chosen, (-c.beta * s - c.lambda) * inv_b, out.gradient);
      scorer.AccumulateRewardGradient(ex.rejected, c.beta * s * inv_b, out.gradient);
    }
  }
  out.total = out.simpo + c.lambda * out.ce;
  return out;
}

namespace {

long double PreciseLoss(std::span<const PreferenceExample> batch, const SequenceScorer &scorer,
                        const SimpoConfig &c) {
  long double total = 0.0L;
  for (const PreferenceExample &ex : batch) {
    const long double rp = scorer.PreciseReward(ex.chosen);
    const long double rn = scorer.PreciseReward(ex.rejected);
    const long double z = -static_cast<long double>(c.beta) * (rp - rn - c.gamma);
    const long double sp = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += sp - static_cast<long double>(c.lambda) * rp;
  }
  return total / static_cast<long double>(batch.size());
}

}  // namespace

GradCheckResult CheckGradient(std::span<const PreferenceExample> batch, SequenceScorer &scorer,
                              const SimpoConfig &c, double h, double floor) {
  const LossValue analytic = CombinedLoss(batch, scorer, c, true);
  auto params = scorer.parameters();
  GradCheckResult r;
  r.parameters = params.size();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    // Difference of the perturbed points actually representable.
    const double hi = keep + h, lo = keep - h;
    params[i] = hi;
    const long double up = PreciseLoss(batch, scorer, c);
    params[i] = lo;
    const long double down = PreciseLoss(batch, scorer, c);
    params[i] = keep;
    const double numeric = static_cast<double>((up - down) / (static_cast<long double>(hi) - lo));
    const double a = analytic.gradient[i];
    const double abs_err = std::abs(a - numeric);
    r.max_abs_error = std::max(r.max_abs_error, abs_err);
    const double scale = std::max(std::abs(a), std::abs(numeric));
    if (scale < floor) continue;
    r.max_rel_error = std::max(r.max_rel_error, abs_err / scale);
  }
  return r;
}

std::vector<TraceRow> TrainToy(std::span<const PreferenceExample> pairs, SequenceScorer &scorer,
                               const SimpoConfig &c, std::size_t steps, double learning_rate) {
  if (pairs.empty()) throw InvalidArgument("simpo", "training needs at least one pair");
  if (!(learning_rate >= 0.0)) throw InvalidArgument("simpo", "learning rate must be >= 0");
  std::vector<TraceRow> trace;
  trace.reserve(steps + 1);
  auto params = scorer.parameters();
  for (std::size_t step = 0; step <= steps; ++step) {
    const bool last = step == steps;
    LossValue lv = CombinedLoss(pairs, scorer, c, !last);
    if (!std::isfinite(lv.total)) throw DivergenceError(step);
    trace.push_back({step, lv.simpo, lv.ce, lv.total, lv.mean_gap});
    if (last) break;
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] -= learning_rate * lv.gradient[i];
      if (!std::isfinite(params[i])) throw DivergenceError(step + 1);
    }
  }
  return trace;
}

std::string TraceCsv(const std::vector<TraceRow> &trace) {
  std::ostringstream os;
  os.precision(10);
  os << "step,simpo,ce,total\n";
  for (const TraceRow &r : trace)
    os << r.step << ',' << r.simpo << ',' << r.ce << ',' << r.total << '\n';
  return os.str();
}

CharTokenizer::CharTokenizer() {
  alphabet_.push_back('\n');
  for (char ch = 32; ch < 127; ++ch) alphabet_.push_back(ch);
}

TokenSeq CharTokenizer::Encode(std::string_view text) const {
  TokenSeq out;
  out.reserve(text.size());
  for (char ch : text) {
    const auto pos = alphabet_.find(ch);
    if (pos == std::string::npos) {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "0x%02X", static_cast<unsigned char>(ch));
      throw InvalidArgument("simpo", std::string("character ") + buf + " outside the tokenizer alphabet");
    }
    out.push_back(static_cast<int>(pos) + 1);
  }
  return out;
}

std::vector<PreferenceExample> SyntheticPairs(std::size_t count, std::size_t vocab,
                                              std::mt19937_64 &rng, std::size_t min_len,
                                              std::size_t max_len) {
  if (vocab < 2 || min_len < 1 || max_len < min_len)
    throw InvalidArgument("simpo", "bad synthetic pair parameters");
  const ToyScorer good = ToyScorer::Random(vocab, rng, 2.0);
  const ToyScorer bad = ToyScorer::Random(vocab, rng, 2.0);
  auto sample = [&](const ToyScorer &chain) {
    const std::size_t len = min_len + static_cast<std::size_t>(UnitDraw(rng) *
                                                              static_cast<double>(max_len - min_len + 1));
    TokenSeq seq;
    std::size_t ctx = 0;
    for (std::size_t t = 0; t < std::min(len, max_len); ++t) {
      const auto p = chain.Distribution(ctx);
      double u = UnitDraw(rng);
      std::size_t next = vocab - 1;
      for (std::size_t j = 0; j < vocab; ++j) {
        if (u < p[j]) {
          next = j;
          break;
        }
        u -= p[j];
      }
      seq.push_back(static_cast<int>(next));
      ctx = next;
    }
    return seq;
  };
  std::vector<PreferenceExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    PreferenceExample ex;
    ex.chosen = sample(good);
    ex.rejected = sample(bad);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace apa
