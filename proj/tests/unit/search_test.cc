// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "fusionkit/core/log_math.h"
#include "fusionkit/core/rng.h"
#include "fusionkit/ctc/ctc.h"
#include "fusionkit/lm/ngram.h"
#include "fusionkit/lm/retokenize.h"
#include "fusionkit/lm/table_lm.h"
#include "fusionkit/search/label_sync.h"
#include "fusionkit/search/time_sync.h"
#include "test_support.h"

namespace fusionkit::search {
namespace {

using fusionkit::testing::MakeVocab;

std::shared_ptr<const Posteriorgram> RandomCtcPg(Rng& rng, const Vocabulary& v,
                                                  size_t frames, double scale = 2.0) {
  return std::make_shared<const Posteriorgram>(fusionkit::testing::RandomPgWithZeros(
      rng, frames, v.size(), {v.bos_id(), v.eos_id()}, scale));
}

std::shared_ptr<const lm::NGramModel> RandomNGram(Rng& rng, const Vocabulary& v,
                                                   int order = 2) {
  std::vector<std::vector<int>> corpus;
  const auto labels = v.EmittableLabels();
  for (int s = 0; s < 6; ++s) {
    std::vector<int> seq;
    const int len = static_cast<int>(rng.UniformInt(0, 4));
    for (int i = 0; i < len; ++i) {
      seq.push_back(labels[rng.UniformInt(0, static_cast<int64_t>(labels.size()) - 1)]);
    }
    corpus.push_back(seq);
  }
  return std::make_shared<const lm::NGramModel>(lm::NGramModel::Train(v, corpus, order));
}

std::shared_ptr<const decoder::Decoder> SmallDecoder(const Vocabulary& v, uint64_t seed,
                                                     decoder::InterfaceKind kind) {
  decoder::HParams hp;
  hp.vocab_size = v.size();
  hp.dim = 8;
  hp.heads = 2;
  hp.layers = 1;
  hp.ffn_dim = 8;
  auto w = std::make_shared<const decoder::DecoderWeights>(
      decoder::DecoderWeights::Random(hp, seed));
  decoder::InterfaceConfig cfg;
  cfg.kind = kind;
  return std::make_shared<const decoder::Decoder>(w, cfg, v.bos_id(), v.eos_id());
}

std::shared_ptr<const Matrix> RandomAudio(Rng& rng, size_t frames, size_t dim) {
  auto m = std::make_shared<Matrix>(frames, dim);
  for (double& x : m->data()) x = rng.Uniform(-1.0, 1.0);
  return m;
}

ScorerWeights Weights(std::map<std::string, double> w, bool norm = false) {
  ScorerWeights sw;
  sw.weights = std::move(w);
  sw.length_norm = norm;
  return sw;
}

std::map<std::vector<int>, double> ByLabels(const NBestList& nbest) {
  std::map<std::vector<int>, double> m;
  for (const auto& h : nbest) m[h.labels] = h.combined_score;
  return m;
}

// Every hypothesis in `a` appears in `b` with the same score, and both agree
// on the best one.
void ExpectSameScores(const NBestList& a, const NBestList& b, double tol) {
  const auto ma = ByLabels(a), mb = ByLabels(b);
  ASSERT_LE(ma.size(), mb.size());
  for (const auto& [labels, score] : ma) {
    ASSERT_TRUE(mb.count(labels));
    EXPECT_NEAR(score, mb.at(labels), tol);
  }
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a.front().labels, b.front().labels);
  EXPECT_NEAR(a.front().combined_score, b.front().combined_score, tol);
}

TEST(LabelSync, BeamOneFollowsTableArgmax) {
  const Vocabulary v = MakeVocab({"x", "y", "z"});
  auto dist = [&](double px, double py, double pz, double pe) {
    std::vector<double> lp(v.size(), kLogZero);
    lp[0] = std::log(px), lp[1] = std::log(py), lp[2] = std::log(pz);
    lp[v.eos_id()] = std::log(pe);
    return lp;
  };
  auto table = std::make_shared<lm::TableLM>(v, dist(0.1, 0.1, 0.1, 0.7));
  table->Set({v.bos_id()}, dist(0.2, 0.5, 0.2, 0.1));
  table->Set({1}, dist(0.1, 0.1, 0.6, 0.2));
  ScorerList scorers{std::make_shared<LmLabelScorer>("lm", ScorerKind::kTable, table, v)};
  const auto nbest = LabelSyncBeam(scorers, Weights({{"lm", 1.0}}), v, {.beam = 1, .max_len = 10});
  ASSERT_EQ(nbest.size(), 1u);
  EXPECT_EQ(nbest[0].labels, (std::vector<int>{1, 2}));
  EXPECT_NEAR(nbest[0].combined_score, std::log(0.5 * 0.6 * 0.7), 1e-12);
}

TEST(LabelSync, SaturatedBeamMatchesExhaustive) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const Vocabulary v = trial % 2 ? MakeVocab({"a", "b"}) : MakeVocab({"a", "b", "c"});
    const size_t frames = 1 + rng.UniformInt(0, 3);
    auto pg = RandomCtcPg(rng, v, frames);
    auto lm = RandomNGram(rng, v);
    auto audio = RandomAudio(rng, 2, 8);
    ScorerList scorers{
        std::make_shared<CtcPrefixLabelScorer>("ctc", pg, v),
        std::make_shared<LmLabelScorer>("lm", ScorerKind::kNGram, lm, v),
        std::make_shared<DecoderLabelScorer>(
            "dec", SmallDecoder(v, trial, decoder::InterfaceKind::kPrefix), audio)};
    const auto w = Weights({{"ctc", rng.Uniform(0.2, 1.0)},
                            {"lm", rng.Uniform(0.0, 0.8)},
                            {"dec", rng.Uniform(0.0, 0.5)}});
    const size_t max_len = frames;
    const auto exhaustive = ExhaustiveDecode(scorers, w, v, max_len);
    const auto beam = LabelSyncBeam(scorers, w, v, {.beam = 1000, .max_len = max_len});
    ExpectSameScores(beam, exhaustive, 1e-9);
  }
}

TEST(LabelSync, ScorerStepsTelescopeToSequenceScores) {
  Rng rng(5);
  const Vocabulary v = MakeVocab({"a", "b", "c"});
  auto pg = RandomCtcPg(rng, v, 5);
  ScorerList scorers{
      std::make_shared<CtcPrefixLabelScorer>("ctc", pg, v),
      std::make_shared<LmLabelScorer>("lm", ScorerKind::kNGram, RandomNGram(rng, v, 3), v),
      std::make_shared<DecoderLabelScorer>(
          "dec", SmallDecoder(v, 3, decoder::InterfaceKind::kMerged), RandomAudio(rng, 3, 8))};
  const auto nbest = LabelSyncBeam(scorers, Weights({{"ctc", 1}, {"lm", 0.5}, {"dec", 0.3}}),
                                   v, {.beam = 4, .max_len = 5});
  ASSERT_FALSE(nbest.empty());
  for (const auto& h : nbest) {
    for (const auto& s : scorers) {
      EXPECT_NEAR(h.score_components.at(s->name()), s->SequenceScore(h.labels), 1e-9);
    }
  }
}

TEST(LabelSync, BeamOneIgnoresLengthNorm) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Vocabulary v = MakeVocab({"a", "b", "c", "d"});
    auto pg = RandomCtcPg(rng, v, 6, 1.0);
    ScorerList scorers{
        std::make_shared<CtcPrefixLabelScorer>("ctc", pg, v),
        std::make_shared<LmLabelScorer>("lm", ScorerKind::kNGram, RandomNGram(rng, v), v)};
    const double a = rng.Uniform(0.0, 1.0), b = rng.Uniform(0.0, 1.0);
    const auto off = LabelSyncBeam(scorers, Weights({{"ctc", a}, {"lm", b}}, false), v,
                                   {.beam = 1, .max_len = 6});
    const auto on = LabelSyncBeam(scorers, Weights({{"ctc", a}, {"lm", b}}, true), v,
                                  {.beam = 1, .max_len = 6});
    ASSERT_EQ(off.size(), 1u);
    ASSERT_EQ(on.size(), 1u);
    EXPECT_EQ(off[0].labels, on[0].labels);
    EXPECT_EQ(off[0].combined_score, on[0].combined_score);
  }
}

TEST(LabelSync, BeamOneIsGreedyOverCombinedIncrements) {
  Rng rng(9);
  const Vocabulary v = MakeVocab({"a", "b", "c"});
  auto pg = RandomCtcPg(rng, v, 5, 1.0);
  auto lm = RandomNGram(rng, v);
  ScorerList scorers{std::make_shared<CtcPrefixLabelScorer>("ctc", pg, v),
                     std::make_shared<LmLabelScorer>("lm", ScorerKind::kNGram, lm, v)};
  const auto w = Weights({{"ctc", 1.0}, {"lm", 0.7}});
  std::vector<int> greedy;
  for (size_t step = 0; step <= 5; ++step) {
    int best = -1;
    double best_score = kLogZero;
    std::vector<int> cands = v.EmittableLabels();
    if (step == 5) cands.clear();
    cands.push_back(v.eos_id());
    for (int c : cands) {
      std::vector<int> ext = greedy;
      double s;
      if (c == v.eos_id()) {
        s = scorers[0]->SequenceScore(greedy) + 0.7 * scorers[1]->SequenceScore(greedy);
      } else {
        ext.push_back(c);
        s = fusionkit::ctc::ForwardLogProb(*pg, ext, v.blank_id());
        // Prefix probability via brute force over completions.
        s = std::log(fusionkit::testing::BruteForcePrefixProb(*pg, ext, v.blank_id()));
        double lm_part = 0.0;
        for (size_t i = 0; i < ext.size(); ++i) {
          lm_part += lm->LogProb(std::span(ext).first(i), ext[i]);
        }
        s += 0.7 * lm_part;
      }
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    if (best == v.eos_id()) break;
    greedy.push_back(best);
  }
  const auto nbest = LabelSyncBeam(scorers, w, v, {.beam = 1, .max_len = 5});
  ASSERT_EQ(nbest.size(), 1u);
  EXPECT_EQ(nbest[0].labels, greedy);
}

TEST(LabelSync, ZeroWeightsReduceToSingleScorer) {
  Rng rng(10);
  const Vocabulary v = MakeVocab({"a", "b", "c"});
  auto pg = RandomCtcPg(rng, v, 4);
  auto ctc = std::make_shared<CtcPrefixLabelScorer>("ctc", pg, v);
  auto dec = std::make_shared<DecoderLabelScorer>(
      "dec", SmallDecoder(v, 4, decoder::InterfaceKind::kAed), RandomAudio(rng, 3, 8));
  const ScorerList both{ctc, dec};
  const LabelSyncOptions opt{.beam = 6, .max_len = 4};
  EXPECT_EQ(LabelSyncBeam(both, Weights({{"ctc", 1.0}, {"dec", 0.0}}), v, opt)[0].labels,
            ExhaustiveDecode({ctc}, Weights({{"ctc", 1.0}}), v, 4)[0].labels);
  EXPECT_EQ(LabelSyncBeam(both, Weights({{"ctc", 0.0}, {"dec", 1.0}}), v, opt)[0].labels,
            LabelSyncBeam({dec}, Weights({{"dec", 1.0}}), v, opt)[0].labels);
}

TEST(LabelSync, TopKWithFullVocabularyChangesNothing) {
  Rng rng(11);
  const Vocabulary v = MakeVocab({"a", "b", "c", "d"});
  auto pg = RandomCtcPg(rng, v, 6);
  auto pruned = std::make_shared<const Posteriorgram>(
      fusionkit::ctc::TopKPrune(*pg, v.size(), v.blank_id()));
  auto lm = RandomNGram(rng, v);
  auto run = [&](std::shared_ptr<const Posteriorgram> p) {
    ScorerList s{std::make_shared<CtcPrefixLabelScorer>("ctc", p, v),
                 std::make_shared<LmLabelScorer>("lm", ScorerKind::kNGram, lm, v)};
    std::ostringstream out;
    WriteNBest(out, LabelSyncBeam(s, Weights({{"ctc", 1}, {"lm", 0.5}}), v,
                                  {.beam = 4, .max_len = 6}),
               v);
    return out.str();
  };
  EXPECT_EQ(run(pg), run(pruned));
}

TEST(LabelSync, StatsAndCandidateRestriction) {
  Rng rng(12);
  const Vocabulary v = MakeVocab({"a", "b", "c", "d", "e", "f"});
  auto pg = RandomCtcPg(rng, v, 6);
  auto lm = RandomNGram(rng, v);
  auto run = [&](std::shared_ptr<const Posteriorgram> p, int beam) {
    ScorerList s{std::make_shared<CtcPrefixLabelScorer>("ctc", p, v),
                 std::make_shared<LmLabelScorer>("lm", ScorerKind::kNGram, lm, v)};
    DecodeStats stats;
    LabelSyncBeam(s, Weights({{"ctc", 1}, {"lm", 0.5}}), v, {.beam = beam, .max_len = 6},
                  &stats);
    return stats;
  };
  const DecodeStats one = run(pg, 1);
  EXPECT_EQ(one.peak_live_hypotheses, 1u);
  const DecodeStats full = run(pg, 4);
  auto pruned = std::make_shared<const Posteriorgram>(
      fusionkit::ctc::TopKPrune(*pg, 3, v.blank_id()));
  const DecodeStats small = run(pruned, 4);
  EXPECT_LT(small.peak_candidates, full.peak_candidates);
  EXPECT_GT(full.scorer_evaluations, 0u);
}

TEST(LabelSync, Errors) {
  const Vocabulary v = MakeVocab({"a"});
  Rng rng(1);
  auto pg = RandomCtcPg(rng, v, 2);
  ScorerList s{std::make_shared<CtcPrefixLabelScorer>("ctc", pg, v)};
  EXPECT_THROW(LabelSyncBeam({}, Weights({{"ctc", 1}}), v, {}), std::invalid_argument);
  EXPECT_THROW(LabelSyncBeam(s, Weights({{"ctc", 1}, {"other", 1}}), v, {}),
               std::invalid_argument);
  EXPECT_THROW(LabelSyncBeam(s, Weights({{"ctc", 1}}), v, {.beam = 0}), std::invalid_argument);
  ScorerList dup{s[0], s[0]};
  EXPECT_THROW(LabelSyncBeam(dup, Weights({{"ctc", 1}}), v, {}), std::invalid_argument);

  const Vocabulary big = MakeVocab({"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"});
  auto pg_big = RandomCtcPg(rng, big, 7);
  ScorerList sb{std::make_shared<CtcPrefixLabelScorer>("ctc", pg_big, big)};
  EXPECT_THROW(ExhaustiveDecode(sb, Weights({{"ctc", 1}}), big, 7), std::invalid_argument);

  const Vocabulary other = MakeVocab({"q"});
  auto lm = RandomNGram(rng, other);
  EXPECT_THROW(LmLabelScorer("lm", ScorerKind::kNGram, lm, v), std::invalid_argument);
}

TEST(Exhaustive, SingletonVocabulary) {
  const Vocabulary v = MakeVocab({"a"});
  auto pg = std::make_shared<const Posteriorgram>(
      fusionkit::testing::PgFromProbs({{0.0, 1.0, 0.0, 0.0}, {1.0, 0.0, 0.0, 0.0}}));
  ScorerList s{std::make_shared<CtcPrefixLabelScorer>("ctc", pg, v)};
  const auto nbest = ExhaustiveDecode(s, Weights({{"ctc", 1}}), v, 2);
  ASSERT_EQ(nbest.size(), 1u);
  EXPECT_EQ(nbest[0].labels, (std::vector<int>{0}));
  EXPECT_NEAR(nbest[0].combined_score, 0.0, 1e-12);
}

TEST(TimeSync, SaturatedBeamMatchesPathSum) {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Vocabulary v = trial % 2 ? MakeVocab({"a", "b"}) : MakeVocab({"a", "b", "c"});
    const size_t frames = 1 + rng.UniformInt(0, 3);
    auto pg = RandomCtcPg(rng, v, frames);
    auto lm = RandomNGram(rng, v);
    const double lambda = rng.Uniform(0.0, 1.0);
    const auto nbest = TimeSyncBeam(*pg, v, lm.get(), lambda, {.beam = 1000});
    const auto mass = fusionkit::testing::BruteForceCollapsedMass(*pg, v.blank_id());
    size_t finite = 0;
    for (const auto& [seq, p] : mass) {
      if (p <= 0.0) continue;
      ++finite;
      const double expected = std::log(p) + lambda * lm::SequenceLogProb(*lm, seq);
      const auto scores = ByLabels(nbest);
      ASSERT_TRUE(scores.count(seq));
      EXPECT_NEAR(scores.at(seq), expected, 1e-9);
    }
    EXPECT_EQ(nbest.size(), finite);

    ScorerList scorers{std::make_shared<CtcPrefixLabelScorer>("ctc", pg, v),
                       std::make_shared<LmLabelScorer>("lm", ScorerKind::kNGram, lm, v)};
    const auto exhaustive =
        ExhaustiveDecode(scorers, Weights({{"ctc", 1.0}, {"lm", lambda}}), v, frames);
    ExpectSameScores(nbest, exhaustive, 1e-9);
  }
}

TEST(TimeSync, ZeroLmWeightIsPureCtc) {
  Rng rng(32);
  const Vocabulary v = MakeVocab({"a", "b", "c"});
  auto pg = RandomCtcPg(rng, v, 8);
  auto lm = RandomNGram(rng, v);
  const auto with_lm = TimeSyncBeam(*pg, v, lm.get(), 0.0, {.beam = 5});
  const auto pure = TimeSyncBeam(*pg, v, nullptr, 0.0, {.beam = 5});
  ASSERT_EQ(with_lm.size(), pure.size());
  for (size_t i = 0; i < pure.size(); ++i) {
    EXPECT_EQ(with_lm[i].labels, pure[i].labels);
    EXPECT_EQ(with_lm[i].score_components.at("ctc"), pure[i].score_components.at("ctc"));
  }
}

TEST(TimeSync, UniformPosteriorgramTieBreaksToLowestId) {
  const Vocabulary v = MakeVocab({"a", "b"});
  const double third = 1.0 / 3.0;
  auto pg = fusionkit::testing::PgFromProbs(
      {{third, third, third, 0.0, 0.0}, {third, third, third, 0.0, 0.0}});
  const auto nbest = TimeSyncBeam(pg, v, nullptr, 0.0, {.beam = 10});
  EXPECT_EQ(nbest[0].labels, (std::vector<int>{0}));
  EXPECT_EQ(nbest[1].labels, (std::vector<int>{1}));
  EXPECT_NEAR(nbest[0].combined_score, std::log(3.0 / 9.0), 1e-12);
}

TEST(TimeSync, MismatchedLmVocabularyIsRejected) {
  Rng rng(33);
  const Vocabulary v = MakeVocab({"a", "b"});
  const Vocabulary other = MakeVocab({"x"});
  auto pg = RandomCtcPg(rng, v, 3);
  auto lm = RandomNGram(rng, other);
  try {
    TimeSyncBeam(*pg, v, lm.get(), 0.5, {});
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("delayed fusion"), std::string::npos);
  }
}

Vocabulary LetterVocab(const std::string& letters) {
  std::vector<Vocabulary::Entry> entries;
  for (char c : letters) {
    entries.push_back({.token = "\xE2\x96\x81" + std::string(1, c), .word_begin = true});
    entries.push_back({.token = std::string(1, c)});
  }
  entries.push_back({.token = "<blank>", .blank = true});
  entries.push_back({.token = "<s>", .bos = true});
  entries.push_back({.token = "</s>", .eos = true});
  return Vocabulary(entries);
}

TEST(DelayedFusion, FinalScoresMatchRescoringOracle) {
  Rng rng(41);
  const Vocabulary am = LetterVocab("abc");
  // LM units: flag-free pieces, including a two-letter one.
  const Vocabulary lm_vocab = MakeVocab({"a", "b", "c", "ab", "ca"}, /*word_begin=*/false);
  for (int trial = 0; trial < 20; ++trial) {
    auto pg = RandomCtcPg(rng, am, 3 + rng.UniformInt(0, 4), 1.5);
    auto lm = RandomNGram(rng, lm_vocab, 3);
    const double lambda = rng.Uniform(0.1, 1.0);
    const auto nbest = DelayedFusionBeam(*pg, am, *lm, lambda, {.beam = 6});
    ASSERT_FALSE(nbest.empty());
    for (const auto& h : nbest) {
      std::string text;
      for (const auto& w : lm::Detokenize(am, h.labels)) text += w + " ";
      const double oracle =
          lm::SequenceLogProb(*lm, lm::Retokenize(lm_vocab, text));
      EXPECT_NEAR(h.combined_score, h.score_components.at("ctc") + lambda * oracle, 1e-9);
    }
  }
}

TEST(DelayedFusion, ZeroWeightMatchesTimeSyncRanking) {
  Rng rng(42);
  const Vocabulary am = LetterVocab("ab");
  const Vocabulary lm_vocab = MakeVocab({"a", "b"}, false);
  auto pg = RandomCtcPg(rng, am, 6);
  auto lm = RandomNGram(rng, lm_vocab);
  const auto delayed = DelayedFusionBeam(*pg, am, *lm, 0.0, {.beam = 5});
  const auto plain = TimeSyncBeam(*pg, am, nullptr, 0.0, {.beam = 5});
  ASSERT_EQ(delayed.size(), plain.size());
  for (size_t i = 0; i < plain.size(); ++i) EXPECT_EQ(delayed[i].labels, plain[i].labels);
}

TEST(DelayedFusion, SingleWordScoredAtTheEnd) {
  // One frame per letter of the word "ab", fully peaked.
  const Vocabulary am = LetterVocab("ab");
  std::vector<std::vector<double>> rows(2, std::vector<double>(am.size(), 0.0));
  rows[0][0] = 1.0;  // ▁a
  rows[1][3] = 1.0;  // b
  const auto pg = fusionkit::testing::PgFromProbs(rows);
  const Vocabulary lm_vocab = MakeVocab({"a", "b", "ab"}, false);
  const auto lm = lm::TableLM::Uniform(lm_vocab);
  const auto nbest = DelayedFusionBeam(pg, am, lm, 1.0, {.beam = 2});
  ASSERT_EQ(nbest[0].labels, (std::vector<int>{0, 3}));
  // "ab" is one LM unit followed by EOS: two uniform terms over 4 outcomes.
  EXPECT_NEAR(nbest[0].score_components.at("lm"), 2.0 * std::log(0.25), 1e-12);
}

TEST(DelayedFusion, UnsegmentableWordWithoutUnkThrows) {
  const Vocabulary am = LetterVocab("ab");
  std::vector<std::vector<double>> rows(1, std::vector<double>(am.size(), 0.0));
  rows[0][2] = 1.0;  // ▁b
  const auto pg = fusionkit::testing::PgFromProbs(rows);
  const Vocabulary lm_vocab = MakeVocab({"a"}, false);
  const auto lm = lm::TableLM::Uniform(lm_vocab);
  EXPECT_THROW(DelayedFusionBeam(pg, am, lm, 1.0, {.beam = 2}), lm::UnsegmentableError);
}

TEST(Rescore, IdentityAndSwap) {
  const Vocabulary v = MakeVocab({"a", "b"});
  auto dist = [&](double pa, double pb, double pe) {
    std::vector<double> lp(v.size(), kLogZero);
    lp[0] = std::log(pa), lp[1] = std::log(pb), lp[v.eos_id()] = std::log(pe);
    return lp;
  };
  lm::TableLM lm(v, dist(0.1, 0.8, 0.1));
  lm.Set({v.bos_id()}, dist(0.1, 0.8, 0.1));
  NBestList nbest(2);
  nbest[0].labels = {0};
  nbest[0].combined_score = -1.0;
  nbest[1].labels = {1};
  nbest[1].combined_score = -1.5;
  const auto same = RescoreNBest(nbest, v, lm, 0.0, 0.0);
  EXPECT_EQ(same[0].labels, nbest[0].labels);
  EXPECT_EQ(same[0].combined_score, -1.0);
  // a: -1 + ln(0.1 * 0.1) = -5.6; b: -1.5 + ln(0.8 * 0.1) = -4.03.
  const auto swapped = RescoreNBest(nbest, v, lm, 1.0, 0.0);
  EXPECT_EQ(swapped[0].labels, (std::vector<int>{1}));
  EXPECT_NEAR(swapped[0].combined_score, -1.5 + std::log(0.08), 1e-12);
  EXPECT_EQ(swapped[0].score_components.at("length"), 1.0);
  const auto rewarded = RescoreNBest(nbest, v, lm, 0.0, 2.0);
  EXPECT_EQ(rewarded[0].combined_score, 1.0);
}

TEST(Rescore, ExhaustiveNBestMatchesSinglePass) {
  Rng rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    const Vocabulary v = MakeVocab({"a", "b", "c"});
    auto pg = RandomCtcPg(rng, v, 3);
    auto lm = RandomNGram(rng, v);
    auto ctc = std::make_shared<CtcPrefixLabelScorer>("ctc", pg, v);
    auto lms = std::make_shared<LmLabelScorer>("lm", ScorerKind::kNGram, lm, v);
    const double lambda = rng.Uniform(0.1, 1.0);
    const auto am_only = ExhaustiveDecode({ctc}, Weights({{"ctc", 1.0}}), v, 3);
    const auto rescored = RescoreNBest(am_only, v, *lm, lambda, 0.0);
    const auto joint = LabelSyncBeam({ctc, lms}, Weights({{"ctc", 1.0}, {"lm", lambda}}), v,
                                     {.beam = 100, .max_len = 3});
    EXPECT_EQ(rescored[0].labels, joint[0].labels);
    EXPECT_NEAR(rescored[0].combined_score, joint[0].combined_score, 1e-9);
  }
}

TEST(NBest, LineFormat) {
  const Vocabulary v = MakeVocab({"a", "b"});
  NBestList nbest(1);
  nbest[0].labels = {1, 0};
  nbest[0].score_components = {{"lm", -2.0}, {"ctc", -1.0}};
  nbest[0].combined_score = -2.0;
  std::ostringstream out;
  WriteNBest(out, nbest, v);
  EXPECT_EQ(out.str(), "1\t-2.0000000000\tctc=-1.0000000000,lm=-2.0000000000\tb a\n");
}

}  // namespace
}  // namespace fusionkit::search
