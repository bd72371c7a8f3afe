// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/lm/language_model.h"

#include <cmath>
#include <stdexcept>

#include "fusionkit/lm/retokenize.h"

namespace fusionkit::lm {

double SequenceLogProb(const LanguageModel& model, std::span<const int> tokens) {
  double total = 0.0;
  for (size_t s = 0; s <= tokens.size(); ++s) {
    const int next = s < tokens.size() ? tokens[s] : model.vocab().eos_id();
    total += model.LogProb(tokens.first(s), next);
  }
  return total;
}

double PerplexityResult::token_ppl() const {
  return std::exp(-total_log_prob / static_cast<double>(num_tokens));
}

double PerplexityResult::word_ppl() const {
  return std::exp(-total_log_prob / static_cast<double>(num_words));
}

PerplexityResult Perplexity(const LanguageModel& model,
                            const std::vector<std::vector<int>>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("perplexity: empty corpus");
  PerplexityResult r;
  for (const auto& seq : corpus) {
    r.total_log_prob += SequenceLogProb(model, seq);
    r.num_tokens += seq.size() + 1;
    r.num_words += Detokenize(model.vocab(), seq).size() + 1;
  }
  return r;
}

}  // namespace fusionkit::lm
