// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <vector>

#include "fusionkit/lm/language_model.h"

namespace fusionkit::lm {

inline constexpr double kDefaultBackoffFactor = 0.4;

// Backoff n-gram model.
//
// Unigrams are add-one smoothed over all outcomes, so no token ever scores
// -inf. For a history h seen in training, a successor w seen after h gets
//   c(h, w) / c(h) / Z(h),
// and every other outcome gets alpha * p(w | h') / Z(h), where h' drops the
// oldest token of h and Z(h) = 1 + alpha * (1 - sum_{w seen} p(w | h'))
// keeps the distribution normalized. Histories never seen fall back to the
// longest seen suffix.
//
// Probabilities are stored as log10 values, the same values the text format
// carries, so loading a saved model reproduces it exactly.
class NGramModel : public LanguageModel {
 public:
  // `corpus` holds token-id sequences without BOS/EOS. Throws
  // std::invalid_argument for an empty corpus or order < 1.
  static NGramModel Train(const Vocabulary& vocab,
                          const std::vector<std::vector<int>>& corpus, int order,
                          double backoff_factor = kDefaultBackoffFactor);

  // Text format:
  //   fusionkit-ngram 1
  //   order <n>
  //   backoff <alpha>
  //   vocab <V>
  //   <V vocabulary lines, same syntax as the vocabulary file>
  //   <order>\t<space-separated context tokens>\t<token>\t<log10 prob>
  // Order-1 entries have an empty context and cover every outcome.
  static NGramModel Read(std::istream& in);
  static NGramModel Load(const std::filesystem::path& path);
  void Write(std::ostream& out) const;
  void Save(const std::filesystem::path& path) const;

  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<double> NextLogProbs(std::span<const int> history) const override;

  int order() const { return order_; }
  double backoff_factor() const { return backoff_factor_; }

 private:
  struct ContextEntry {
    std::map<int, double> log10_probs;  // seen successors
    double log_backoff = 0.0;           // natural log
  };

  NGramModel(Vocabulary vocab, int order, double backoff_factor);
  // Fills log_backoff for every stored context, shortest first.
  void ComputeBackoffs();
  // Natural-log distribution for an explicit context (BOS included).
  std::vector<double> Distribution(std::span<const int> context) const;

  Vocabulary vocab_;
  int order_;
  double backoff_factor_;
  std::vector<double> unigram_log10_;  // indexed by id; -inf for non-outcomes
  std::map<std::vector<int>, ContextEntry> contexts_;
};

}  // namespace fusionkit::lm
