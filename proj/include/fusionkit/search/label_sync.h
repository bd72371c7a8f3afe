// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "fusionkit/core/hypothesis.h"
#include "fusionkit/core/vocabulary.h"
#include "fusionkit/search/nbest.h"
#include "fusionkit/search/scorer.h"

namespace fusionkit::search {

// Throws std::invalid_argument for an empty list, duplicate names, weights
// naming no scorer, or weights rejected by ScorerWeights::Validate.
void ValidateScorers(const ScorerList& scorers, const ScorerWeights& weights);

// floor(max_len_factor * num_frames).
size_t MaxLabels(const ScorerWeights& weights, size_t num_frames);

// Emittable labels that every scorer with a nonzero weight supports.
std::vector<int> CandidateLabels(const ScorerList& scorers,
                                 const ScorerWeights& weights,
                                 const Vocabulary& vocab);

struct LabelSyncOptions {
  int beam = 8;
  size_t max_len = 0;  // labels before EOS is forced
};

// Label-synchronous beam search over the weighted sum of scorer increments.
// Every step expands each active hypothesis by all candidate labels and
// EOS; finished hypotheses stay in the beam and compete with active ones.
// Pruning ranks by RankingScore (length-normalized when enabled); the
// search stops once the best-ranked hypothesis is finished. Scorers with
// zero weight are not evaluated.
NBestList LabelSyncBeam(const ScorerList& scorers, const ScorerWeights& weights,
                        const Vocabulary& vocab, const LabelSyncOptions& options,
                        DecodeStats* stats = nullptr);

inline constexpr double kExhaustiveBudget = 1e6;

// Scores every candidate label sequence of length <= max_len (plus EOS)
// with LabelScorer::SequenceScore. Sequences with -inf score are dropped.
// Throws std::invalid_argument if the number of sequences exceeds
// kExhaustiveBudget.
NBestList ExhaustiveDecode(const ScorerList& scorers, const ScorerWeights& weights,
                           const Vocabulary& vocab, size_t max_len);

}  // namespace fusionkit::search
