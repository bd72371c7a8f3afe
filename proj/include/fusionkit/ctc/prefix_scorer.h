// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fusionkit/core/posteriorgram.h"

namespace fusionkit::ctc {

// Forward variables of one label prefix g over all frames:
// log P(g, frame t ends in blank) and log P(g, frame t ends in last(g)).
struct PrefixState {
  std::vector<double> blank_ending;
  std::vector<double> label_ending;
  int last_label = -1;  // -1 for the empty prefix
  // log P(collapsed output starts with g)
  double prefix_log_prob = 0.0;
  size_t length = 0;
};

// Incremental CTC prefix probabilities for label-synchronous decoding.
class PrefixScorer {
 public:
  PrefixScorer(std::shared_ptr<const Posteriorgram> pg, int blank, int eos);

  PrefixState Initial() const;

  // For each candidate c writes log P(collapsed output starts with g.c);
  // for c == eos writes log P(collapsed output == g). Throws
  // std::invalid_argument if a candidate is blank.
  void Score(const PrefixState& state, std::span<const int> candidates,
             std::span<double> out) const;

  PrefixState Extend(const PrefixState& state, int label) const;

  // log P(collapsed output == g)
  double FullLogProb(const PrefixState& state) const;

  const Posteriorgram& posteriorgram() const { return *pg_; }

 private:
  double ScoreOne(const PrefixState& state, int label,
                  std::vector<double>* label_ending) const;

  std::shared_ptr<const Posteriorgram> pg_;
  Matrix probs_;  // exp of the posteriorgram
  int blank_;
  int eos_;
};

}  // namespace fusionkit::ctc
