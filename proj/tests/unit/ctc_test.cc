// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "fusionkit/core/log_math.h"
#include "fusionkit/ctc/ctc.h"
#include "fusionkit/ctc/prefix_scorer.h"
#include "test_support.h"

namespace fusionkit::ctc {
namespace {

using testing::PgFromProbs;

// Label ids for the small fixtures: a=0, b=1, blank=2 (and eos=3 where an
// end-of-sequence id is needed; it never appears in a posteriorgram).
constexpr int kA = 0;
constexpr int kB = 1;
constexpr int kBlank = 2;
constexpr int kEos = 3;

Posteriorgram Uniform(size_t frames, size_t labels) {
  return PgFromProbs(std::vector<std::vector<double>>(
      frames, std::vector<double>(labels, 1.0 / labels)));
}

TEST(Collapse, Examples) {
  EXPECT_EQ(Collapse(std::vector<int>{kA, kA, kBlank, kB, kB}, kBlank),
            (std::vector<int>{kA, kB}));
  EXPECT_TRUE(Collapse(std::vector<int>{kBlank, kBlank, kBlank}, kBlank).empty());
  EXPECT_EQ(Collapse(std::vector<int>{kA, kBlank, kA}, kBlank),
            (std::vector<int>{kA, kA}));
}

TEST(ForwardLogProb, SingleFrame) {
  const auto pg = PgFromProbs({{0.5, 0.3, 0.2}});
  EXPECT_NEAR(ForwardLogProb(pg, std::vector<int>{kA}, kBlank), std::log(0.5),
              1e-15);
  EXPECT_EQ(ForwardLogProb(pg, std::vector<int>{kA, kB}, kBlank), kLogZero);
}

TEST(ForwardLogProb, UniformTwoFrames) {
  // 9 paths, 3 collapse to "a": (a,a), (a,blank), (blank,a).
  EXPECT_NEAR(ForwardLogProb(Uniform(2, 3), std::vector<int>{kA}, kBlank),
              std::log(3.0 / 9.0), 1e-15);
}

TEST(ForwardLogProb, RepeatNeedsSeparatingBlank) {
  const auto pg = Uniform(2, 3);
  EXPECT_EQ(ForwardLogProb(pg, std::vector<int>{kA, kA}, kBlank), kLogZero);
  EXPECT_NEAR(ForwardLogProb(Uniform(3, 3), std::vector<int>{kA, kA}, kBlank),
              std::log(1.0 / 27.0), 1e-15);
}

TEST(ForwardLogProb, RejectsBlankInTarget) {
  EXPECT_THROW(ForwardLogProb(Uniform(2, 3), std::vector<int>{kBlank}, kBlank),
               std::invalid_argument);
}

TEST(ForwardLogProb, MatchesBruteForce) {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const size_t frames = rng.UniformInt(1, 5);
    const size_t labels = rng.UniformInt(2, 4);
    const int blank = static_cast<int>(rng.UniformInt(0, labels - 1));
    const auto pg = testing::RandomPg(rng, frames, labels);
    for (const auto& [seq, mass] : testing::BruteForceCollapsedMass(pg, blank)) {
      EXPECT_NEAR(std::exp(ForwardLogProb(pg, seq, blank)), mass, 1e-12);
    }
  }
}

TEST(GreedyDecode, Examples) {
  const auto peaked = PgFromProbs({{0.8, 0.1, 0.1},
                                   {0.8, 0.1, 0.1},
                                   {0.1, 0.1, 0.8},
                                   {0.1, 0.8, 0.1}});
  EXPECT_EQ(GreedyDecode(peaked, kBlank), (std::vector<int>{kA, kB}));
  const auto blanks = PgFromProbs({{0.1, 0.1, 0.8}, {0.2, 0.1, 0.7}});
  EXPECT_TRUE(GreedyDecode(blanks, kBlank).empty());
  const auto tie = PgFromProbs({{0.4, 0.4, 0.2}});
  EXPECT_EQ(GreedyDecode(tie, kBlank), (std::vector<int>{kA}));
}

TEST(PrefixScorer, UniformPrefixProbabilities) {
  auto pg = std::make_shared<const Posteriorgram>(Uniform(2, 3));
  PrefixScorer scorer(pg, kBlank, kEos);
  const PrefixState root = scorer.Initial();
  std::vector<double> out(2);
  scorer.Score(root, std::vector<int>{kA, kEos}, out);
  // (a,a), (a,blank), (blank,a), (a,b) collapse to something starting with a.
  EXPECT_NEAR(out[0], std::log(4.0 / 9.0), 1e-15);
  EXPECT_NEAR(out[1], std::log(1.0 / 9.0), 1e-15);

  const PrefixState a = scorer.Extend(root, kA);
  EXPECT_NEAR(a.prefix_log_prob, std::log(4.0 / 9.0), 1e-15);
  std::vector<double> eos(1);
  scorer.Score(a, std::vector<int>{kEos}, eos);
  EXPECT_NEAR(eos[0], std::log(3.0 / 9.0), 1e-15);
  EXPECT_NEAR(eos[0], ForwardLogProb(*pg, std::vector<int>{kA}, kBlank), 1e-15);
}

TEST(PrefixScorer, RejectsBlankCandidate) {
  auto pg = std::make_shared<const Posteriorgram>(Uniform(2, 3));
  PrefixScorer scorer(pg, kBlank, kEos);
  std::vector<double> out(1);
  EXPECT_THROW(scorer.Score(scorer.Initial(), std::vector<int>{kBlank}, out),
               std::invalid_argument);
}

TEST(PrefixScorer, MatchesBruteForceAndTelescopes) {
  Rng rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const size_t frames = rng.UniformInt(1, 5);
    const size_t labels = rng.UniformInt(2, 4);
    const int blank = static_cast<int>(labels - 1);
    const int eos = static_cast<int>(labels);  // outside the pg columns
    auto pg = std::make_shared<const Posteriorgram>(
        testing::RandomPg(rng, frames, labels));
    PrefixScorer scorer(pg, blank, eos);

    std::vector<int> prefix;
    PrefixState state = scorer.Initial();
    for (size_t step = 0; step < 3; ++step) {
      std::vector<int> candidates;
      for (int c = 0; c < blank; ++c) candidates.push_back(c);
      candidates.push_back(eos);
      std::vector<double> out(candidates.size());
      scorer.Score(state, candidates, out);
      double children = 0.0;
      for (size_t i = 0; i < candidates.size(); ++i) {
        std::vector<int> extended = prefix;
        double expected;
        if (candidates[i] == eos) {
          expected = testing::BruteForceCtcProb(*pg, prefix, blank);
          EXPECT_TRUE(testing::LogNear(out[i], ForwardLogProb(*pg, prefix, blank), 1e-9));
        } else {
          extended.push_back(candidates[i]);
          expected = testing::BruteForcePrefixProb(*pg, extended, blank);
          EXPECT_LE(out[i], state.prefix_log_prob + 1e-12);
        }
        EXPECT_NEAR(std::exp(out[i]), expected, 1e-12);
        children += std::exp(out[i]);
      }
      // The children partition the parent event.
      EXPECT_NEAR(children, std::exp(state.prefix_log_prob), 1e-9);
      const int next = static_cast<int>(rng.UniformInt(0, blank - 1));
      state = scorer.Extend(state, next);
      prefix.push_back(next);
      for (size_t t = 0; t < frames; ++t) {
        EXPECT_LE(std::exp(state.blank_ending[t]) + std::exp(state.label_ending[t]),
                  1.0 + 1e-6);
      }
    }
  }
}

TEST(MergeIndices, MergesOnlyConfidentRepeats) {
  // argmax labels a,a,blank,b,b with max probabilities .95,.96,.99,.80,.97
  auto row = [](int label, double p) {
    std::vector<double> r(3, (1.0 - p) / 2.0);
    r[label] = p;
    return r;
  };
  const auto pg = PgFromProbs({row(kA, 0.95), row(kA, 0.96), row(kBlank, 0.99),
                               row(kB, 0.80), row(kB, 0.97)});
  const MergeIndexMap map = MergeIndices(pg, 0.9);
  EXPECT_EQ(map.indices, (std::vector<int>{1, 1, 2, 3, 4}));
  EXPECT_EQ(map.num_groups(), 4);
  EXPECT_EQ(map.threshold, 0.9);

  EXPECT_EQ(MergeIndices(pg, 1.5).indices, (std::vector<int>{1, 2, 3, 4, 5}));

  const auto constant = PgFromProbs({row(kA, 0.95), row(kA, 0.95), row(kA, 0.95)});
  EXPECT_EQ(MergeIndices(constant, 0.9).indices, (std::vector<int>{1, 1, 1}));
  EXPECT_THROW(MergeIndices(pg, 0.0), std::invalid_argument);
}

TEST(MergeIndices, UnitStepsProperty) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pg = testing::RandomPg(rng, rng.UniformInt(1, 20), 3, 4.0);
    const double tau = rng.Uniform(0.3, 1.2);
    const MergeIndexMap map = MergeIndices(pg, tau);
    ASSERT_EQ(map.indices.front(), 1);
    for (size_t t = 1; t < map.indices.size(); ++t) {
      const int step = map.indices[t] - map.indices[t - 1];
      EXPECT_TRUE(step == 0 || step == 1);
    }
    EXPECT_EQ(MergeIndices(pg, 1.0 + 1e-9).indices,
              IdentityMergeMap(pg.num_frames()).indices);
  }
}

TEST(CompressEncoder, MeanPooling) {
  Matrix frames(5, 1);
  for (size_t t = 0; t < 5; ++t) frames(t, 0) = 2.0 * t + 1.0;  // 1,3,5,7,9
  const EncoderOutput enc(frames);
  EXPECT_EQ(CompressEncoder(enc, IdentityMergeMap(5)).frames(), frames);

  MergeIndexMap map{.indices = {1, 1, 2, 3, 4}};
  const EncoderOutput out = CompressEncoder(enc, map);
  ASSERT_EQ(out.num_frames(), 4u);
  EXPECT_DOUBLE_EQ(out.frames()(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(out.frames()(3, 0), 9.0);
  EXPECT_THROW(CompressEncoder(enc, IdentityMergeMap(4)), std::invalid_argument);
}

TEST(CompressPosteriors, MaxPoolThenRenormalize) {
  const auto pg = PgFromProbs({{0.7, 0.2, 0.1}, {0.6, 0.3, 0.1}});
  EXPECT_EQ(CompressPosteriors(pg, IdentityMergeMap(2)).log_probs(),
            pg.log_probs());
  const auto merged = CompressPosteriors(pg, MergeIndexMap{.indices = {1, 1}});
  ASSERT_EQ(merged.num_frames(), 1u);
  EXPECT_NEAR(std::exp(merged(0, 0)), 0.7 / 1.1, 1e-12);
  EXPECT_NEAR(std::exp(merged(0, 1)), 0.3 / 1.1, 1e-12);
  EXPECT_NEAR(std::exp(merged(0, 2)), 0.1 / 1.1, 1e-12);
  EXPECT_NEAR(LogSumExp(merged.Row(0)), 0.0, 1e-12);
}

TEST(TopKPrune, Examples) {
  const auto pg = PgFromProbs({{0.7, 0.2, 0.1}, {0.1, 0.3, 0.6}});
  EXPECT_EQ(TopKPrune(pg, 3, kBlank).log_probs(), pg.log_probs());

  // max over time: a .7, b .3, blank .6 -> keep {a, blank}
  EXPECT_EQ(TopKLabels(pg, 2, kBlank), (std::vector<int>{kA, kBlank}));
  const auto pruned = TopKPrune(pg, 2, kBlank);
  EXPECT_NEAR(std::exp(pruned(0, kA)), 0.875, 1e-12);
  EXPECT_EQ(pruned(0, kB), kLogZero);
  EXPECT_NEAR(std::exp(pruned(0, kBlank)), 0.125, 1e-12);
  EXPECT_NEAR(std::exp(pruned(1, kA)), 0.1 / 0.7, 1e-12);
  EXPECT_NEAR(std::exp(pruned(1, kBlank)), 0.6 / 0.7, 1e-12);

  const auto only_blank = TopKPrune(pg, 1, kBlank);
  EXPECT_TRUE(GreedyDecode(only_blank, kBlank).empty());
  EXPECT_EQ(TopKLabels(pg, 1, kBlank, /*keep_blank=*/false),
            (std::vector<int>{kA}));

  EXPECT_THROW(TopKPrune(pg, 0, kBlank), std::out_of_range);
  EXPECT_THROW(TopKPrune(pg, 4, kBlank), std::out_of_range);
}

TEST(TopKPrune, TiesGoToLowerId) {
  const auto pg = PgFromProbs({{0.4, 0.4, 0.2}});
  EXPECT_EQ(TopKLabels(pg, 2, kBlank), (std::vector<int>{kA, kBlank}));
}

TEST(TopKPrune, GreedyUnchangedWhenArgmaxesKept) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t labels = rng.UniformInt(3, 8);
    const int blank = static_cast<int>(labels - 1);
    const auto pg = testing::RandomPg(rng, rng.UniformInt(1, 12), labels, 3.0);
    const int k = static_cast<int>(rng.UniformInt(1, labels));
    const auto kept = TopKLabels(pg, k, blank);
    const auto pruned = TopKPrune(pg, k, blank);
    for (size_t t = 0; t < pruned.num_frames(); ++t) {
      EXPECT_NEAR(LogSumExp(pruned.Row(t)), 0.0, 1e-12);
    }
    bool all_kept = true;
    for (size_t t = 0; t < pg.num_frames(); ++t) {
      const int best = static_cast<int>(ArgMax(pg.Row(t)));
      all_kept = all_kept &&
                 std::find(kept.begin(), kept.end(), best) != kept.end();
    }
    if (all_kept) {
      EXPECT_EQ(GreedyDecode(pruned, blank), GreedyDecode(pg, blank));
    }
  }
}

}  // namespace
}  // namespace fusionkit::ctc
