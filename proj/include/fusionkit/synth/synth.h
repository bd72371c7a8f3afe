// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fusionkit/core/posteriorgram.h"
#include "fusionkit/core/rng.h"
#include "fusionkit/core/vocabulary.h"
#include "fusionkit/decoder/weights.h"
#include "fusionkit/lm/table_lm.h"

namespace fusionkit::synth {

// The built-in lowercase word list.
const std::vector<std::string>& DefaultWordList();

// Word-begin letters "▁a".."▁z", continuation letters "a".."z", fifty
// frequent continuation bigrams, whole-word pieces for the first half of
// DefaultWordList, then <blank>, <s>, </s>.
Vocabulary SubwordVocabulary();

struct SynthConfig {
  uint64_t seed = 1;
  // Seeds the word grammar, so corpora and LM text with different `seed`
  // still share one language.
  uint64_t grammar_seed = 7;
  Vocabulary vocab = SubwordVocabulary();
  std::vector<std::string> words = DefaultWordList();
  int min_words = 2, max_words = 5;
  int min_frames = 1, max_frames = 3;  // frames per token
  int min_gap = 0, max_gap = 2;        // blank frames between tokens
  // Off-target mass per frame, spread uniformly over the other labels.
  double noise = 0.0;
  // A token is confused with probability confusion_scale * noise: a random
  // competitor takes part of the target's mass.
  double confusion_scale = 0.5;
  int successors = 3;
  double successor_prob = 0.9;
  double frame_duration_ms = kDefaultFrameDurationMs;

  // Throws std::invalid_argument.
  void Validate() const;
  // "key = value" lines, vocabulary and word list excluded.
  std::string ToText() const;
};

// Each word has `successors` fixed follow-up words. A sentence starts with a
// uniform word and then moves to one of the successors with probability
// successor_prob, or to a uniform word otherwise.
class Grammar {
 public:
  Grammar(const std::vector<std::string>& words, int successors, uint64_t seed);

  std::vector<std::string> Sample(Rng& rng, int min_words, int max_words,
                                  double successor_prob) const;

 private:
  const std::vector<std::string>* words_;
  std::vector<std::vector<int>> next_;
};

struct Utterance {
  std::string id;
  Posteriorgram pg;
  // Token-rate encoder view for the attention decoder; see RenderEncoderView.
  EncoderOutput encoder;
  std::string reference;
  std::vector<int> tokens;
};

// Frame layout: a leading gap, then per token d frames followed by a gap.
// Identical neighbouring tokens always get at least one blank frame. bos
// and eos get zero probability.
Posteriorgram RenderPosteriorgram(const std::vector<int>& tokens, const SynthConfig& cfg,
                                  Rng& rng, bool confusions = true);

// One row per token plus a closing row, 3V wide: [evidence for token j,
// evidence for token j-1, evidence for token j-2]. Evidence follows the
// frame noise model with its own confusion draws; the closing row carries
// eos, and positions before the first token carry bos.
EncoderOutput RenderEncoderView(const std::vector<int>& tokens, const SynthConfig& cfg,
                                Rng& rng);

// Deterministic per (cfg.seed, index). Throws std::invalid_argument for
// n == 0 and lm::UnsegmentableError for words the vocabulary cannot spell.
std::vector<Utterance> GenerateCorpus(const SynthConfig& cfg, size_t n);

// Grammar sentences, tokenized; LM training text for the synthetic corpora.
std::vector<std::vector<int>> GenerateTokenText(const SynthConfig& cfg, size_t n,
                                                uint64_t seed);

// Writes <id>.fkpg and <id>.fkeo files, refs.txt (id\ttranscript) and config.txt.
void WriteCorpus(const std::filesystem::path& dir, const SynthConfig& cfg,
                 const std::vector<Utterance>& corpus);

struct OscillationScenario {
  Posteriorgram pg;
  lm::TableLM lm;
  std::string reference;
  std::vector<int> loop;  // tokens of the repeated word pair
};

// The table model follows the reference closely, then loops over its last
// two words with a small end-of-sentence probability. The posteriorgram is
// rendered without confusions. The reference has at least three words and
// every token at least two frames and one trailing blank, which leaves the
// length cap room for several loops.
OscillationScenario GenerateOscillationScenario(const SynthConfig& cfg);

// One-layer aed decoder that reads a RenderEncoderView sequence. A
// self-attention head copies the previous token into its own subspace; the
// current and previous tokens then cross-attend to the rows whose two
// predecessors match them (sharpened by `focus`), and the evidence of those
// rows becomes the logits, scaled by `sharpness`. The feed-forward output is
// zero and the adapter projection is the identity on the 3V-wide rows.
decoder::DecoderWeights ReaderDecoderWeights(const Vocabulary& vocab, double focus = 12.0,
                                             double sharpness = 8.0);

}  // namespace fusionkit::synth
