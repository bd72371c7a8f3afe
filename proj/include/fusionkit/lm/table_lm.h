// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <vector>

#include "fusionkit/lm/language_model.h"

namespace fusionkit::lm {

// Explicit context -> distribution table, used to build exact fixtures and
// adversarial scorers.
//
// Lookup uses the longest stored context that is a suffix of BOS + history;
// contexts may therefore start with the bos id to match only at sentence
// start. Histories without a match use the default distribution.
class TableLM : public LanguageModel {
 public:
  // Every distribution must be indexed by vocabulary id and normalized
  // within 1e-9 over the outcomes (blank and bos must be -inf).
  TableLM(Vocabulary vocab, std::vector<double> default_log_probs);

  // Uniform over every outcome.
  static TableLM Uniform(Vocabulary vocab);

  void Set(std::vector<int> context, std::vector<double> log_probs);

  // Text format:
  //   fusionkit-tablelm 1
  //   vocab <V>
  //   <V vocabulary lines>
  //   default\t\t<tok>=<logp>,<tok>=<logp>,...
  //   context\t<space-separated tokens>\t<tok>=<logp>,...
  // Outcomes not listed have probability 0.
  static TableLM Read(std::istream& in);
  static TableLM Load(const std::filesystem::path& path);
  void Write(std::ostream& out) const;
  void Save(const std::filesystem::path& path) const;

  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<double> NextLogProbs(std::span<const int> history) const override;

  size_t num_contexts() const { return table_.size(); }

 private:
  void Check(const std::vector<double>& log_probs) const;

  Vocabulary vocab_;
  std::vector<double> default_;
  std::map<std::vector<int>, std::vector<double>> table_;
  size_t max_context_ = 0;
};

}  // namespace fusionkit::lm
