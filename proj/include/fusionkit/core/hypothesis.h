// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

namespace fusionkit {

// Log-linear weights of the scorers taking part in a decode.
struct ScorerWeights {
  std::map<std::string, double> weights;
  // Prune by combined score divided by the current length; final n-best
  // order and stored scores stay unnormalized.
  bool length_norm = false;
  // Label-synchronous search stops at floor(max_len_factor * T) labels.
  double max_len_factor = 1.0;

  double Weight(const std::string& name) const;
  // Throws std::invalid_argument if every weight is zero or the length cap
  // factor is not positive.
  void Validate() const;
  // Weighted sum of components; components without a weight contribute 0.
  double Combine(const std::map<std::string, double>& components) const;
};

struct Hypothesis {
  std::vector<int> labels;
  std::map<std::string, double> score_components;
  double combined_score = 0.0;
  bool finished = false;

  // Score used for pruning: combined_score, divided by the number of scored
  // steps (labels, plus EOS once finished) when length normalization is on.
  double RankingScore(bool length_norm) const;
};

// Deterministic hypothesis order: higher score, then shorter sequence, then
// lexicographically smaller label ids.
bool RanksBefore(double score_a, const std::vector<int>& labels_a,
                 double score_b, const std::vector<int>& labels_b);

}  // namespace fusionkit
