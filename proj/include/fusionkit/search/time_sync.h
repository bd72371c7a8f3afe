// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fusionkit/core/posteriorgram.h"
#include "fusionkit/core/vocabulary.h"
#include "fusionkit/lm/language_model.h"
#include "fusionkit/search/nbest.h"

namespace fusionkit::search {

struct TimeSyncOptions {
  int beam = 8;
};

// Frame-synchronous CTC prefix beam search. Paths that collapse to the same
// label sequence are merged by log-sum-exp of their blank- and
// label-ending masses. With an LM, lm_weight * log p_LM(c | prefix) is
// added when label c is appended and the EOS term once at the end.
// Components: "ctc" (merged path mass) and "lm" (raw LM log-prob).
// Throws std::invalid_argument if the LM vocabulary differs from `vocab`;
// use DelayedFusionBeam then.
NBestList TimeSyncBeam(const Posteriorgram& pg, const Vocabulary& vocab,
                       const lm::LanguageModel* lm, double lm_weight,
                       const TimeSyncOptions& options, DecodeStats* stats = nullptr);

// Time-synchronous search with an LM over another vocabulary. LM scores are
// added when a word is complete, i.e. when the next word-begin token is
// appended: the word is retokenized into LM units and scored after the
// words committed so far. The last word and EOS are scored at the end, so
// the final "lm" component equals the LM log-prob of the retokenized word
// sequence. Hypotheses are merged by label sequence, which also fixes their
// pending word.
NBestList DelayedFusionBeam(const Posteriorgram& pg, const Vocabulary& am_vocab,
                            const lm::LanguageModel& lm, double lm_weight,
                            const TimeSyncOptions& options,
                            DecodeStats* stats = nullptr);

// Adds "rescore_lm" (LM log-prob of each hypothesis, retokenized when the
// LM vocabulary differs from `hyp_vocab`) and "length", sets
//   combined = previous combined + lm_weight * rescore_lm + length_reward * len
// and re-sorts, keeping the previous order among equal scores.
NBestList RescoreNBest(NBestList nbest, const Vocabulary& hyp_vocab,
                       const lm::LanguageModel& lm, double lm_weight,
                       double length_reward);

// LM log-prob of a hypothesis given in `hyp_vocab` labels: direct if the
// vocabularies agree, otherwise via its words retokenized into the LM
// vocabulary.
double HypothesisLmLogProb(const Vocabulary& hyp_vocab, const lm::LanguageModel& lm,
                           const std::vector<int>& labels);

}  // namespace fusionkit::search
