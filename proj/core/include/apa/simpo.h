// core/include/apa/simpo.h

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

#ifndef APA_SIMPO_H_
#define APA_SIMPO_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apa/error.h"

namespace apa {

struct SimpoConfig {
  double beta = 0.1;    // preference sharpness
  double gamma = 0.5;   // reward margin
  double lambda = 0.1;  // weight of the cross-entropy term

  void Validate() const;  // throws InvalidArgument
};

// Mean token log-likelihood. Throws InvalidArgument on an empty list.
double Reward(std::span<const double> token_logprobs);

// Per-token log-likelihoods of one response plus its length-normalised
// reward.
class SequenceScore {
 public:
  explicit SequenceScore(std::vector<double> token_logprobs);
  const std::vector<double> &token_logprobs() const { return logprobs_; }
  std::size_t length() const { return logprobs_.size(); }
  double reward() const { return reward_; }

 private:
  std::vector<double> logprobs_;
  double reward_;
};

// log(1 + e^x) without overflow.
double Softplus(double x);
// 1 / (1 + e^-x) without overflow.
double Sigmoid(double x);

// log(1 + exp(-beta * (r_pos - r_neg - gamma))).
double SimpoLoss(double r_pos, double r_neg, const SimpoConfig &c);

using TokenSeq = std::vector<int>;

struct PreferenceExample {
  TokenSeq chosen;
  TokenSeq rejected;
};

// Anything that can score a token sequence autoregressively and
// differentiate the reward with respect to its parameters.
class SequenceScorer {
 public:
  virtual ~SequenceScorer() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual std::span<double> parameters() = 0;
  virtual std::span<const double> parameters() const = 0;
  // Throws InvalidArgument on an empty sequence or out-of-vocabulary token.
  virtual SequenceScore Score(std::span<const int> tokens) const = 0;
  // grad += weight * d reward(tokens) / d parameters
  virtual void AccumulateRewardGradient(std::span<const int> tokens, double weight,
                                        std::span<double> grad) const = 0;
  // Reward evaluated in extended precision, for finite differencing.
  virtual long double PreciseReward(std::span<const int> tokens) const {
    return Score(tokens).reward();
  }
};

// Bigram model: log P(y_t | y_{t-1}) is the log-softmax of row y_{t-1} of a
// V x V logit table. Token 0 doubles as the start symbol, so the first
// token is conditioned on row 0.
class ToyScorer : public SequenceScorer {
 public:
  explicit ToyScorer(std::size_t vocab);  // all-zero logits: uniform
  static ToyScorer Random(std::size_t vocab, std::mt19937_64 &rng, double scale = 1.0);

  std::size_t vocab_size() const override { return vocab_; }
  std::span<double> parameters() override { return theta_; }
  std::span<const double> parameters() const override { return theta_; }
  SequenceScore Score(std::span<const int> tokens) const override;
  void AccumulateRewardGradient(std::span<const int> tokens, double weight,
                                std::span<double> grad) const override;
  long double PreciseReward(std::span<const int> tokens) const override;

  double Logit(std::size_t from, std::size_t to) const { return theta_[from * vocab_ + to]; }
  // Conditional distribution over the next token given `from`.
  std::vector<double> Distribution(std::size_t from) const;

 private:
  void CheckTokens(std::span<const int> tokens) const;
  std::size_t vocab_;
  std::vector<double> theta_;
};

struct LossValue {
  double simpo = 0.0;       // batch mean of the preference term
  double ce = 0.0;          // batch mean token cross-entropy of chosen
  double total = 0.0;       // simpo + lambda * ce
  double mean_gap = 0.0;    // batch mean of r(chosen) - r(rejected)
  std::vector<double> gradient;  // d total / d parameters, when requested
};

// SimPO plus lambda times the chosen response's cross-entropy, averaged
// over the batch. Summation runs in batch order.
LossValue CombinedLoss(std::span<const PreferenceExample> batch,
                       const SequenceScorer &scorer, const SimpoConfig &c,
                       bool with_gradient = true);

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t parameters = 0;
};

// Compares CombinedLoss's analytic gradient against central finite
// differences of the loss, evaluated in extended precision so rounding
// noise stays far below h^2. Per-element error is |a - n| / max(|a|, |n|),
// skipped when both are below `floor`.
GradCheckResult CheckGradient(std::span<const PreferenceExample> batch,
                              SequenceScorer &scorer, const SimpoConfig &c,
                              double h = 1e-5, double floor = 1e-9);

class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::size_t step)
      : Error("simpo", "training diverged at step " + std::to_string(step)),
        step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct TraceRow {
  std::size_t step = 0;
  double simpo = 0.0;
  double ce = 0.0;
  double total = 0.0;
  double mean_gap = 0.0;
};

// Full-batch gradient descent. trace[k] is the loss before update k; the
// last row is the loss after the final update.
std::vector<TraceRow> TrainToy(std::span<const PreferenceExample> pairs,
                               SequenceScorer &scorer, const SimpoConfig &c,
                               std::size_t steps, double learning_rate);

// step,simpo,ce,total
std::string TraceCsv(const std::vector<TraceRow> &trace);

// Character vocabulary: 0 is the start symbol, then '\n' and printable
// ASCII.
class CharTokenizer {
 public:
  CharTokenizer();
  std::size_t vocab_size() const { return 1 + alphabet_.size(); }
  // Throws InvalidArgument naming the first character outside the alphabet.
  TokenSeq Encode(std::string_view text) const;

 private:
  std::string alphabet_;
};

// Pairs whose chosen side is sampled from one random bigram chain and
// rejected side from another; lengths uniform in [min_len, max_len].
std::vector<PreferenceExample> SyntheticPairs(std::size_t count, std::size_t vocab,
                                              std::mt19937_64 &rng,
                                              std::size_t min_len = 8,
                                              std::size_t max_len = 32);

}  // namespace apa

#endif  // APA_SIMPO_H_
