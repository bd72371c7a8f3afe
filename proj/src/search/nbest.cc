// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/search/nbest.h"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

namespace fusionkit::search {

void SortNBest(NBestList& nbest) {
  std::sort(nbest.begin(), nbest.end(), [](const Hypothesis& a, const Hypothesis& b) {
    return RanksBefore(a.combined_score, a.labels, b.combined_score, b.labels);
  });
}

std::string FormatScore(double value) { return fmt::format("{:.10f}", value); }

void WriteNBest(std::ostream& out, const NBestList& nbest, const Vocabulary& vocab) {
  for (size_t i = 0; i < nbest.size(); ++i) {
    const Hypothesis& h = nbest[i];
    std::string comps;
    for (const auto& [name, value] : h.score_components) {
      if (!comps.empty()) comps += ',';
      comps += name + "=" + FormatScore(value);
    }
    out << (i + 1) << '\t' << FormatScore(h.combined_score) << '\t' << comps << '\t'
        << vocab.Join(h.labels) << '\n';
  }
}

void DecodeStats::Merge(const DecodeStats& other) {
  scorer_evaluations += other.scorer_evaluations;
  peak_live_hypotheses = std::max(peak_live_hypotheses, other.peak_live_hypotheses);
  peak_candidates = std::max(peak_candidates, other.peak_candidates);
  wall_seconds += other.wall_seconds;
  audio_seconds += other.audio_seconds;
}

}  // namespace fusionkit::search
