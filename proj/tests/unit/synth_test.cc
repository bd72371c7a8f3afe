// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "fusionkit/core/text.h"
#include "fusionkit/ctc/ctc.h"
#include "fusionkit/decoder/adapter.h"
#include "fusionkit/eval/wer.h"
#include "fusionkit/lm/ngram.h"
#include "fusionkit/lm/retokenize.h"
#include "fusionkit/search/label_sync.h"
#include "fusionkit/search/time_sync.h"
#include "fusionkit/synth/synth.h"

namespace fusionkit::synth {
namespace {

eval::AlignmentCounts Score(const std::string& ref, const Vocabulary& v,
                            const std::vector<int>& labels) {
  return eval::Align(SplitWhitespace(ref), SplitWhitespace(lm::DetokenizeText(v, labels)));
}

TEST(Synth, VocabularyAndWordList) {
  const Vocabulary v = SubwordVocabulary();
  EXPECT_EQ(v.size(), 26 + 26 + 50 + 56 + 3);
  EXPECT_GE(DefaultWordList().size(), 100u);
  const lm::Retokenizer tok(v);
  for (const auto& w : DefaultWordList()) {
    const auto ids = tok.Word(w);
    EXPECT_EQ(lm::DetokenizeText(v, ids), w);
  }
  EXPECT_EQ(tok.Word("the").size(), 1u);
  EXPECT_EQ(tok.Word("these").size(), 2u);  // ▁the se
  EXPECT_EQ(tok.Word("world").size(), 4u);  // ▁w or l d
}

TEST(Synth, NoiselessCorpusIsRecoveredByGreedy) {
  SynthConfig cfg;
  cfg.seed = 11;
  for (const auto& u : GenerateCorpus(cfg, 50)) {
    ValidateLogProbRows(u.pg.log_probs());
    EXPECT_EQ(ctc::GreedyDecode(u.pg, cfg.vocab.blank_id()), u.tokens);
    EXPECT_EQ(lm::DetokenizeText(cfg.vocab, u.tokens), u.reference);
  }
}

TEST(Synth, NoisyRowsAreNormalized) {
  SynthConfig cfg;
  cfg.noise = 0.3;
  for (const auto& u : GenerateCorpus(cfg, 30)) {
    ValidateLogProbRows(u.pg.log_probs());
    EXPECT_EQ(u.pg(0, cfg.vocab.bos_id()), -INFINITY);
  }
}

TEST(Synth, DeterministicPerSeed) {
  SynthConfig cfg;
  cfg.noise = 0.3;
  const auto a = GenerateCorpus(cfg, 20), b = GenerateCorpus(cfg, 20);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].pg.log_probs(), b[i].pg.log_probs());
    EXPECT_EQ(a[i].reference, b[i].reference);
  }
  cfg.seed = 2;
  const auto c = GenerateCorpus(cfg, 20);
  int differing = 0;
  for (size_t i = 0; i < a.size(); ++i) differing += a[i].reference != c[i].reference;
  EXPECT_GT(differing, 10);
}

TEST(Synth, IdenticalNeighboursGetABlankGap) {
  SynthConfig cfg;
  cfg.min_gap = cfg.max_gap = 0;
  Rng rng(1);
  const int a = *cfg.vocab.Find("l");
  const auto pg = RenderPosteriorgram({a, a}, cfg, rng);
  EXPECT_EQ(ctc::GreedyDecode(pg, cfg.vocab.blank_id()), (std::vector<int>{a, a}));
}

TEST(Synth, ConfigValidation) {
  SynthConfig cfg;
  cfg.noise = 1.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = SynthConfig();
  cfg.min_words = 4;
  cfg.max_words = 3;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  EXPECT_THROW(GenerateCorpus(SynthConfig(), 0), std::invalid_argument);
  cfg = SynthConfig();
  cfg.words = {"naïve"};
  EXPECT_THROW(GenerateCorpus(cfg, 1), lm::UnsegmentableError);
  EXPECT_NE(SynthConfig().ToText().find("noise = 0\n"), std::string::npos);
}

TEST(Synth, GrammarMostlyFollowsSuccessors) {
  const auto& words = DefaultWordList();
  const Grammar g(words, 3, 5);
  Rng rng(2);
  std::map<std::pair<std::string, std::string>, int> bigrams;
  int total = 0;
  for (int i = 0; i < 500; ++i) {
    const auto s = g.Sample(rng, 4, 4, 0.9);
    ASSERT_EQ(s.size(), 4u);
    for (size_t j = 1; j < s.size(); ++j, ++total) ++bigrams[{s[j - 1], s[j]}];
  }
  // At most 3 successors per word cover ~90% of the transitions.
  std::map<std::string, std::vector<int>> by_first;
  for (const auto& [bg, c] : bigrams) by_first[bg.first].push_back(c);
  int top = 0;
  for (auto& [w, counts] : by_first) {
    std::sort(counts.rbegin(), counts.rend());
    for (size_t k = 0; k < std::min<size_t>(3, counts.size()); ++k) top += counts[k];
  }
  EXPECT_GT(static_cast<double>(top) / total, 0.85);
}

std::shared_ptr<const search::DecoderLabelScorer> Reader(const Vocabulary& v,
                                                         const EncoderOutput& view) {
  auto w = std::make_shared<const decoder::DecoderWeights>(ReaderDecoderWeights(v));
  decoder::InterfaceConfig cfg;
  cfg.kind = decoder::InterfaceKind::kAed;
  auto dec = std::make_shared<const decoder::Decoder>(w, cfg, v.bos_id(), v.eos_id());
  decoder::AdapterConfig adapter;
  adapter.projection = &*w->adapter_proj;
  auto audio = std::make_shared<const Matrix>(decoder::ApplyAdapter(view, adapter).frames());
  return std::make_shared<const search::DecoderLabelScorer>("dec", dec, audio);
}

TEST(Synth, ReaderDecoderFollowsItsEncoderView) {
  SynthConfig cfg;
  const Vocabulary& v = cfg.vocab;
  for (const auto& u : GenerateCorpus(cfg, 10)) {
    ASSERT_EQ(u.encoder.num_frames(), u.tokens.size() + 1);
    const auto scorer = Reader(v, u.encoder);
    std::vector<int> inputs{v.bos_id(), v.bos_id()};
    inputs.insert(inputs.end(), u.tokens.begin(), u.tokens.end());
    std::vector<int> expected = u.tokens;
    expected.push_back(v.eos_id());
    const std::vector<int> all = v.LmOutcomes();
    std::vector<double> out(all.size());
    auto state = scorer->Initial();
    for (size_t s = 0; s < expected.size(); ++s) {
      scorer->Score(*state, all, out);
      const double p = std::exp(out[std::find(all.begin(), all.end(), expected[s]) - all.begin()]);
      // A token pair that precedes several rows splits the attention.
      int repeats = 0;
      for (size_t j = 0; j + 1 < inputs.size(); ++j) {
        repeats += inputs[j] == inputs[s] && inputs[j + 1] == inputs[s + 1];
      }
      if (repeats == 1) {
        EXPECT_GT(p, 0.85) << u.id << " step " << s;
      } else {
        const auto better = std::count_if(out.begin(), out.end(),
                                          [&](double o) { return o > std::log(p); });
        EXPECT_LT(better, repeats) << u.id << " step " << s;
      }
      if (s + 1 < expected.size()) state = scorer->Advance(*state, expected[s]);
    }
  }
}

TEST(Synth, EncoderViewConfusionsAreIndependentOfTheFrames) {
  SynthConfig cfg;
  cfg.noise = 0.5;
  cfg.confusion_scale = 2.0;  // every token confused
  const auto u = GenerateCorpus(cfg, 1)[0];
  const int n = cfg.vocab.size();
  const auto& m = u.encoder.frames();
  for (size_t j = 0; j + 1 < m.rows(); ++j) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += m(j, i);
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_LE(m(j, u.tokens[j]), 0.5 * 0.7 + 1e-12);
    if (j > 0) {
      EXPECT_EQ(m(j, n + u.tokens[j - 1]), m(j - 1, u.tokens[j - 1]));
    }
  }
  EXPECT_EQ(m(0, n + cfg.vocab.bos_id()), 1.0);
  EXPECT_EQ(m(m.rows() - 1, cfg.vocab.eos_id()), 1.0);
}

TEST(Synth, NoiselessCorpusDecodesPerfectlyEverywhere) {
  SynthConfig cfg;
  cfg.seed = 4;
  const auto corpus = GenerateCorpus(cfg, 15);
  const auto lm = std::make_shared<const lm::NGramModel>(
      lm::NGramModel::Train(cfg.vocab, GenerateTokenText(cfg, 500, 99), 3));
  for (const auto& u : corpus) {
    auto pg = std::make_shared<const Posteriorgram>(u.pg);
    EXPECT_EQ(search::TimeSyncBeam(u.pg, cfg.vocab, lm.get(), 0.5, {.beam = 4})[0].labels,
              u.tokens);
    const search::ScorerList scorers{
        std::make_shared<search::CtcPrefixLabelScorer>("ctc", pg, cfg.vocab),
        std::make_shared<search::LmLabelScorer>("lm", search::ScorerKind::kNGram, lm, cfg.vocab)};
    ScorerWeights w;
    w.weights = {{"ctc", 1.0}, {"lm", 0.5}};
    const auto nbest = search::LabelSyncBeam(scorers, w, cfg.vocab,
                                             {.beam = 4, .max_len = u.pg.num_frames()});
    EXPECT_EQ(nbest[0].labels, u.tokens);
  }
}

struct OscillationRun {
  size_t standalone_ins, joint_ins, ctc_ins, longest, max_len;
  std::string joint_text;
};

OscillationRun RunOscillation(uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.noise = 0.05;
  cfg.min_words = 3;
  cfg.max_words = 5;
  const auto sc = GenerateOscillationScenario(cfg);
  const Vocabulary& v = cfg.vocab;
  auto pg = std::make_shared<const Posteriorgram>(sc.pg);
  auto table = std::make_shared<const lm::TableLM>(sc.lm);
  auto ctc = std::make_shared<search::CtcPrefixLabelScorer>("ctc", pg, v);
  auto lms = std::make_shared<search::LmLabelScorer>("lm", search::ScorerKind::kTable, table, v);
  ScorerWeights standalone;
  standalone.weights = {{"lm", 1.0}};
  standalone.length_norm = true;
  ScorerWeights joint = standalone;
  joint.weights = {{"ctc", 1.0}, {"lm", 1.0}};
  const size_t max_len = search::MaxLabels(standalone, pg->num_frames());
  const auto alone = search::LabelSyncBeam({lms}, standalone, v, {.beam = 4, .max_len = max_len});
  const auto both = search::LabelSyncBeam({ctc, lms}, joint, v, {.beam = 4, .max_len = max_len});
  const auto greedy = ctc::GreedyDecode(*pg, v.blank_id());
  size_t longest = 0;
  for (const auto& h : alone) longest = std::max(longest, h.labels.size());
  return {Score(sc.reference, v, alone[0].labels).insertions,
          Score(sc.reference, v, both[0].labels).insertions,
          Score(sc.reference, v, greedy).insertions, longest, max_len,
          lm::DetokenizeText(v, both[0].labels) == sc.reference ? "" : "mismatch"};
}

TEST(Oscillation, JointCtcRemovesTheLoop) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = RunOscillation(seed);
    EXPECT_GE(r.standalone_ins, 5u) << seed;
    EXPECT_EQ(r.longest, r.max_len) << seed;
    EXPECT_EQ(r.joint_ins, 0u) << seed;
    EXPECT_EQ(r.joint_text, "") << seed;
    EXPECT_EQ(r.ctc_ins, 0u) << seed;
  }
}

TEST(Oscillation, LoopRepeatsTheLastTwoWords) {
  SynthConfig cfg;
  cfg.min_words = 3;
  const auto sc = GenerateOscillationScenario(cfg);
  const auto words = SplitWhitespace(sc.reference);
  EXPECT_EQ(lm::DetokenizeText(cfg.vocab, sc.loop),
            words[words.size() - 2] + " " + words.back());
}

}  // namespace
}  // namespace fusionkit::synth
