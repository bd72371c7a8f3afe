// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "fusionkit/core/vocabulary.h"

namespace fusionkit::lm {

// Autoregressive token model p(a_s | BOS, a_1 .. a_{s-1}) over
// Vocabulary::LmOutcomes() (every id but blank and bos). Implementations are
// immutable and safe to share between threads.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const Vocabulary& vocab() const = 0;

  // Natural-log distribution of the next token, indexed by vocabulary id.
  // `history` holds the tokens after the implicit BOS. blank and bos get
  // -inf.
  virtual std::vector<double> NextLogProbs(std::span<const int> history) const = 0;

  virtual double LogProb(std::span<const int> history, int token) const {
    return NextLogProbs(history).at(token);
  }
};

// sum_s log p(a_s | a_0 .. a_{s-1}) for a_0 = BOS and a final EOS term.
// `tokens` excludes both BOS and EOS.
double SequenceLogProb(const LanguageModel& model, std::span<const int> tokens);

struct PerplexityResult {
  double total_log_prob = 0.0;
  size_t num_tokens = 0;  // predicted tokens, one EOS per sequence included
  size_t num_words = 0;   // words of the detokenized text, one EOS per sequence
  double token_ppl() const;
  double word_ppl() const;
};

// Pooled over the corpus. Throws std::invalid_argument on an empty corpus.
PerplexityResult Perplexity(const LanguageModel& model,
                            const std::vector<std::vector<int>>& corpus);

}  // namespace fusionkit::lm
