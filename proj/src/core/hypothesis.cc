// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/core/hypothesis.h"

#include <algorithm>
#include <stdexcept>

namespace fusionkit {

double ScorerWeights::Weight(const std::string& name) const {
  auto it = weights.find(name);
  return it == weights.end() ? 0.0 : it->second;
}

void ScorerWeights::Validate() const {
  const bool any = std::any_of(weights.begin(), weights.end(),
                               [](const auto& kv) { return kv.second != 0.0; });
  if (!any) throw std::invalid_argument("all scorer weights are zero");
  if (!(max_len_factor > 0.0)) {
    throw std::invalid_argument("max_len_factor must be positive");
  }
}

double ScorerWeights::Combine(
    const std::map<std::string, double>& components) const {
  double total = 0.0;
  for (const auto& [name, value] : components) {
    const double w = Weight(name);
    if (w != 0.0) total += w * value;
  }
  return total;
}

double Hypothesis::RankingScore(bool length_norm) const {
  const size_t steps = labels.size() + (finished ? 1 : 0);
  if (!length_norm || steps == 0) return combined_score;
  return combined_score / static_cast<double>(steps);
}

bool RanksBefore(double score_a, const std::vector<int>& labels_a,
                 double score_b, const std::vector<int>& labels_b) {
  if (score_a != score_b) return score_a > score_b;
  if (labels_a.size() != labels_b.size()) {
    return labels_a.size() < labels_b.size();
  }
  return labels_a < labels_b;
}

}  // namespace fusionkit
