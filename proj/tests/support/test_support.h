// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

// Fixtures and independent oracles shared by the unit and acceptance tests.
// Nothing here calls into the code paths it is used to check.

#pragma once

#include <gtest/gtest.h>

#include <map>
#include <string>
#include <vector>

#include "fusionkit/core/posteriorgram.h"
#include "fusionkit/core/rng.h"
#include "fusionkit/core/vocabulary.h"

namespace fusionkit::testing {

// Vocabulary with the given ordinary tokens (ids 0..n-1, all word_begin)
// followed by <blank>, <s>, </s>.
Vocabulary MakeVocab(const std::vector<std::string>& tokens,
                     bool word_begin = true, bool with_unk = false);

// Builds a posteriorgram from linear-domain rows (each must sum to 1).
Posteriorgram PgFromProbs(const std::vector<std::vector<double>>& rows,
                          double frame_duration_ms = 60.0);

// Rows drawn from a softmax of uniform(-scale, scale) logits.
Posteriorgram RandomPg(Rng& rng, size_t frames, size_t labels,
                       double scale = 2.0);

// Same, but columns listed in `zero_columns` get probability 0.
Posteriorgram RandomPgWithZeros(Rng& rng, size_t frames, size_t labels,
                                const std::vector<int>& zero_columns,
                                double scale = 2.0);

// Sum over all labels^frames frame paths, grouped by collapsed output.
// Returned in the linear domain.
std::map<std::vector<int>, double> BruteForceCollapsedMass(
    const Posteriorgram& pg, int blank);

// Linear-domain probability that the collapsed output equals `target`.
double BruteForceCtcProb(const Posteriorgram& pg,
                         const std::vector<int>& target, int blank);

// Linear-domain probability that the collapsed output starts with `prefix`.
double BruteForcePrefixProb(const Posteriorgram& pg,
                            const std::vector<int>& prefix, int blank);

// |a - b| <= tol, treating equal infinities as equal.
::testing::AssertionResult LogNear(double a, double b, double tol);

// Plain scalar Levenshtein distance.
int ReferenceEditDistance(const std::vector<std::string>& a,
                          const std::vector<std::string>& b);

// Backoff n-gram probability computed straight from corpus counts:
// add-one unigrams over every outcome (EOS counted as an event), and for a
// seen history h, c(h,w)/c(h)/Z(h) for seen successors and
// alpha * p(w|h')/Z(h) otherwise. `history` excludes the implicit BOS.
double OracleNGramProb(const Vocabulary& vocab,
                       const std::vector<std::vector<int>>& corpus, int order,
                       double alpha, const std::vector<int>& history, int w);

}  // namespace fusionkit::testing
