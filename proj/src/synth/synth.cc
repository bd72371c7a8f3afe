// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/synth/synth.h"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "fusionkit/core/log_math.h"
#include "fusionkit/lm/retokenize.h"

namespace fusionkit::synth {

namespace {

constexpr const char* kWordBeginMarker = "\xE2\x96\x81";

// Table model for the oscillation scenario.
constexpr double kFollowProb = 0.9;
constexpr double kEarlyEosProb = 0.001;
constexpr double kLoopEosProb = 0.02;

std::vector<int> DrawLabels(const Vocabulary& vocab) {
  std::vector<int> labels = vocab.EmittableLabels();
  labels.push_back(vocab.blank_id());
  return labels;
}

// Frame distribution with `target` at 1 - noise and the noise spread over
// the other renderable labels.
std::vector<double> FrameProbs(const Vocabulary& vocab, const std::vector<int>& labels,
                               int target, double noise) {
  std::vector<double> p(vocab.size(), 0.0);
  const double share = noise / static_cast<double>(labels.size() - 1);
  for (int l : labels) p[l] = share;
  p[target] = 1.0 - noise;
  return p;
}

// FrameProbs for a token, where with probability `confusion_prob` a random
// competitor takes 30-80% of the target's mass.
std::vector<double> TokenEvidence(const Vocabulary& vocab, const std::vector<int>& labels,
                                  int target, double noise, double confusion_prob, Rng& rng) {
  auto probs = FrameProbs(vocab, labels, target, noise);
  if (confusion_prob > 0.0 && rng.Bernoulli(confusion_prob)) {
    const auto emittable = vocab.EmittableLabels();
    int c = target;
    while (c == target) {
      c = emittable[rng.UniformInt(0, static_cast<int64_t>(emittable.size()) - 1)];
    }
    const double keep = rng.Uniform(0.2, 0.7);
    probs[c] += (1.0 - noise) * (1.0 - keep);
    probs[target] = (1.0 - noise) * keep;
  }
  return probs;
}

void AppendFrame(Matrix& m, const std::vector<double>& probs) {
  std::vector<double> row(probs.size());
  for (size_t i = 0; i < probs.size(); ++i) row[i] = std::log(probs[i]);
  m.AppendRow(row);
}

std::vector<int> Tokenize(const lm::Retokenizer& tok, const std::vector<std::string>& words) {
  std::vector<int> out;
  for (const auto& w : words) {
    const auto ids = tok.Word(w);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

std::string JoinWords(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

// `follow` at the next token, `eos` at EOS, the rest spread over the other
// outcomes.
std::vector<double> PeakedDistribution(const Vocabulary& vocab, int next, double follow,
                                       double eos) {
  const auto outcomes = vocab.LmOutcomes();
  const double rest = (1.0 - follow - eos) / static_cast<double>(outcomes.size() - 2);
  std::vector<double> lp(vocab.size(), kLogZero);
  for (int o : outcomes) lp[o] = std::log(rest);
  lp[next] = std::log(follow);
  lp[vocab.eos_id()] = std::log(eos);
  return lp;
}

}  // namespace

const std::vector<std::string>& DefaultWordList() {
  static const std::vector<std::string> words = {
      "the",    "of",     "and",    "to",     "in",     "is",     "was",    "that",
      "for",    "it",     "with",   "as",     "his",    "on",     "be",     "at",
      "by",     "had",    "not",    "are",    "but",    "from",   "or",     "have",
      "an",     "they",   "which",  "one",    "you",    "were",   "her",    "all",
      "she",    "there",  "would",  "their",  "we",     "him",    "been",   "has",
      "when",   "who",    "will",   "more",   "no",     "if",     "out",    "so",
      "said",   "what",   "up",     "its",    "about",  "into",   "than",   "them",
      "can",    "only",   "other",  "new",    "some",   "could",  "time",   "these",
      "two",    "may",    "then",   "do",     "first",  "any",    "my",     "now",
      "such",   "like",   "our",    "over",   "man",    "me",     "even",   "most",
      "made",   "after",  "also",   "did",    "many",   "before", "must",   "through",
      "back",   "years",  "where",  "much",   "your",   "way",    "well",   "down",
      "should", "because", "each",  "just",   "those",  "people", "how",    "too",
      "little", "state",  "good",   "very",   "make",   "world",  "still",  "own",
  };
  return words;
}

// The most frequent words of the list also exist as single pieces.
constexpr size_t kWholeWordPieces = 56;

Vocabulary SubwordVocabulary() {
  static const char* kPieces[] = {
      "th", "he", "in", "er", "an", "re", "on", "at", "en", "nd", "ti", "es", "or",
      "te", "of", "ed", "is", "it", "al", "ar", "st", "to", "nt", "ng", "se", "ha",
      "as", "ou", "io", "le", "ve", "co", "me", "de", "hi", "ri", "ro", "ic", "ne",
      "ea", "ra", "ce", "li", "ch", "ll", "be", "ma", "si", "om", "ur"};
  std::vector<Vocabulary::Entry> entries;
  for (char c = 'a'; c <= 'z'; ++c) {
    entries.push_back({.token = kWordBeginMarker + std::string(1, c), .word_begin = true});
  }
  for (char c = 'a'; c <= 'z'; ++c) entries.push_back({.token = std::string(1, c)});
  for (const char* p : kPieces) entries.push_back({.token = p});
  const auto& words = DefaultWordList();
  for (size_t i = 0; i < kWholeWordPieces; ++i) {
    entries.push_back({.token = kWordBeginMarker + words[i], .word_begin = true});
  }
  entries.push_back({.token = "<blank>", .blank = true});
  entries.push_back({.token = "<s>", .bos = true});
  entries.push_back({.token = "</s>", .eos = true});
  return Vocabulary(std::move(entries));
}

void SynthConfig::Validate() const {
  if (!(noise >= 0.0 && noise < 1.0)) throw std::invalid_argument("noise must be in [0, 1)");
  if (!(confusion_scale >= 0.0) || confusion_scale * noise > 1.0) {
    throw std::invalid_argument("confusion probability must be in [0, 1]");
  }
  if (min_words < 1 || min_words > max_words) throw std::invalid_argument("bad word range");
  if (min_frames < 1 || min_frames > max_frames) throw std::invalid_argument("bad frame range");
  if (min_gap < 0 || min_gap > max_gap) throw std::invalid_argument("bad gap range");
  if (words.empty()) throw std::invalid_argument("empty word list");
  if (successors < 1) throw std::invalid_argument("successors must be positive");
  if (!(successor_prob >= 0.0 && successor_prob <= 1.0)) {
    throw std::invalid_argument("successor_prob must be in [0, 1]");
  }
  if (!(frame_duration_ms > 0.0)) throw std::invalid_argument("frame duration must be positive");
  if (vocab.EmittableLabels().size() < 2) {
    throw std::invalid_argument("vocabulary needs at least two ordinary labels");
  }
}

std::string SynthConfig::ToText() const {
  std::string out;
  out += fmt::format("seed = {}\n", seed);
  out += fmt::format("grammar_seed = {}\n", grammar_seed);
  out += fmt::format("words = {}..{}\n", min_words, max_words);
  out += fmt::format("frames = {}..{}\n", min_frames, max_frames);
  out += fmt::format("gap = {}..{}\n", min_gap, max_gap);
  out += fmt::format("noise = {:.17g}\n", noise);
  out += fmt::format("confusion_scale = {:.17g}\n", confusion_scale);
  out += fmt::format("successors = {}\n", successors);
  out += fmt::format("successor_prob = {:.17g}\n", successor_prob);
  out += fmt::format("frame_duration_ms = {:.17g}\n", frame_duration_ms);
  out += fmt::format("vocab_size = {}\n", vocab.size());
  out += fmt::format("word_list_size = {}\n", words.size());
  return out;
}

Grammar::Grammar(const std::vector<std::string>& words, int successors, uint64_t seed)
    : words_(&words), next_(words.size()) {
  Rng rng(seed);
  const auto n = static_cast<int64_t>(words.size());
  for (auto& succ : next_) {
    for (int i = 0; i < successors; ++i) {
      succ.push_back(static_cast<int>(rng.UniformInt(0, n - 1)));
    }
  }
}

std::vector<std::string> Grammar::Sample(Rng& rng, int min_words, int max_words,
                                         double successor_prob) const {
  const auto n = static_cast<int64_t>(words_->size());
  const auto len = rng.UniformInt(min_words, max_words);
  std::vector<std::string> out;
  int w = static_cast<int>(rng.UniformInt(0, n - 1));
  out.push_back((*words_)[w]);
  while (static_cast<int64_t>(out.size()) < len) {
    if (rng.Bernoulli(successor_prob)) {
      const auto& succ = next_[w];
      w = succ[rng.UniformInt(0, static_cast<int64_t>(succ.size()) - 1)];
    } else {
      w = static_cast<int>(rng.UniformInt(0, n - 1));
    }
    out.push_back((*words_)[w]);
  }
  return out;
}

Posteriorgram RenderPosteriorgram(const std::vector<int>& tokens, const SynthConfig& cfg,
                                  Rng& rng, bool confusions) {
  const Vocabulary& v = cfg.vocab;
  const auto labels = DrawLabels(v);
  const auto blank_frame = FrameProbs(v, labels, v.blank_id(), cfg.noise);
  const double confusion_prob = confusions ? cfg.confusion_scale * cfg.noise : 0.0;
  Matrix m;
  auto gap = [&](int min_len) {
    const int n = std::max<int>(min_len, static_cast<int>(rng.UniformInt(cfg.min_gap, cfg.max_gap)));
    for (int i = 0; i < n; ++i) AppendFrame(m, blank_frame);
  };
  gap(0);
  for (size_t i = 0; i < tokens.size(); ++i) {
    const int t = tokens[i];
    auto probs = TokenEvidence(v, labels, t, cfg.noise, confusion_prob, rng);
    const auto d = rng.UniformInt(cfg.min_frames, cfg.max_frames);
    for (int64_t f = 0; f < d; ++f) AppendFrame(m, probs);
    const bool repeat_next = i + 1 < tokens.size() && tokens[i + 1] == t;
    gap(repeat_next ? 1 : 0);
  }
  if (m.rows() == 0) AppendFrame(m, blank_frame);
  return Posteriorgram(std::move(m), cfg.frame_duration_ms);
}

EncoderOutput RenderEncoderView(const std::vector<int>& tokens, const SynthConfig& cfg,
                                Rng& rng) {
  const Vocabulary& v = cfg.vocab;
  const int n = v.size();
  const auto labels = DrawLabels(v);
  const double confusion_prob = cfg.confusion_scale * cfg.noise;
  std::vector<std::vector<double>> evidence;
  for (int t : tokens) {
    auto probs = TokenEvidence(v, labels, t, cfg.noise, confusion_prob, rng);
    evidence.push_back(std::move(probs));
  }
  std::vector<double> eos(n, 0.0), bos(n, 0.0);
  eos[v.eos_id()] = 1.0;
  bos[v.bos_id()] = 1.0;
  evidence.push_back(eos);
  Matrix m(evidence.size(), 3 * n);
  for (size_t j = 0; j < evidence.size(); ++j) {
    const auto& prev = j >= 1 ? evidence[j - 1] : bos;
    const auto& prev2 = j >= 2 ? evidence[j - 2] : bos;
    for (int i = 0; i < n; ++i) {
      m(j, i) = evidence[j][i];
      m(j, n + i) = prev[i];
      m(j, 2 * n + i) = prev2[i];
    }
  }
  return EncoderOutput(std::move(m));
}

std::vector<Utterance> GenerateCorpus(const SynthConfig& cfg, size_t n) {
  cfg.Validate();
  if (n == 0) throw std::invalid_argument("corpus needs at least one utterance");
  const Grammar grammar(cfg.words, cfg.successors, cfg.grammar_seed);
  const lm::Retokenizer tok(cfg.vocab);
  std::vector<Utterance> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    Rng rng(Rng::Mix(cfg.seed, i));
    const auto words = grammar.Sample(rng, cfg.min_words, cfg.max_words, cfg.successor_prob);
    auto tokens = Tokenize(tok, words);
    Posteriorgram pg = RenderPosteriorgram(tokens, cfg, rng);
    Rng view_rng(Rng::Mix(Rng::Mix(cfg.seed, i), 1));
    EncoderOutput encoder = RenderEncoderView(tokens, cfg, view_rng);
    out.push_back({fmt::format("utt{:05d}", i), std::move(pg), std::move(encoder),
                   JoinWords(words), std::move(tokens)});
  }
  return out;
}

std::vector<std::vector<int>> GenerateTokenText(const SynthConfig& cfg, size_t n,
                                                uint64_t seed) {
  cfg.Validate();
  const Grammar grammar(cfg.words, cfg.successors, cfg.grammar_seed);
  const lm::Retokenizer tok(cfg.vocab);
  Rng rng(seed);
  std::vector<std::vector<int>> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    out.push_back(
        Tokenize(tok, grammar.Sample(rng, cfg.min_words, cfg.max_words, cfg.successor_prob)));
  }
  return out;
}

void WriteCorpus(const std::filesystem::path& dir, const SynthConfig& cfg,
                 const std::vector<Utterance>& corpus) {
  std::filesystem::create_directories(dir);
  std::ofstream refs(dir / "refs.txt");
  for (const auto& u : corpus) {
    WritePosteriorgram(u.pg, dir / (u.id + ".fkpg"));
    WriteEncoderOutput(u.encoder, dir / (u.id + ".fkeo"));
    refs << u.id << '\t' << u.reference << '\n';
  }
  std::ofstream(dir / "config.txt") << cfg.ToText();
  cfg.vocab.Save(dir / "vocab.txt");
  if (!refs) throw std::runtime_error("cannot write " + (dir / "refs.txt").string());
}

OscillationScenario GenerateOscillationScenario(const SynthConfig& base) {
  base.Validate();
  SynthConfig cfg = base;
  cfg.min_words = std::max(cfg.min_words, 3);
  cfg.max_words = std::max(cfg.max_words, cfg.min_words);
  cfg.min_frames = std::max(cfg.min_frames, 2);
  cfg.max_frames = std::max(cfg.max_frames, cfg.min_frames);
  cfg.min_gap = std::max(cfg.min_gap, 1);
  cfg.max_gap = std::max(cfg.max_gap, cfg.min_gap);
  const Vocabulary& v = cfg.vocab;
  const Grammar grammar(cfg.words, cfg.successors, cfg.grammar_seed);
  const lm::Retokenizer tok(v);
  Rng rng(Rng::Mix(cfg.seed, 0x05c111a7e));
  const auto words = grammar.Sample(rng, cfg.min_words, cfg.max_words, cfg.successor_prob);
  const auto ref = Tokenize(tok, words);
  const auto loop = Tokenize(tok, {words[words.size() - 2], words.back()});

  lm::TableLM table = lm::TableLM::Uniform(v);
  std::vector<int> context{v.bos_id()};
  for (int t : ref) {
    table.Set(context, PeakedDistribution(v, t, kFollowProb, kEarlyEosProb));
    context.push_back(t);
  }
  // Entry into the loop keeps the full history; inside the loop the last
  // loop-length tokens identify the position.
  for (size_t i = 0; i < loop.size(); ++i) {
    table.Set(context, PeakedDistribution(v, loop[i], kFollowProb, kLoopEosProb));
    context.push_back(loop[i]);
  }
  const size_t m = loop.size();
  for (size_t j = 0; j < m; ++j) {
    std::vector<int> cyclic;
    for (size_t k = 0; k < m; ++k) cyclic.push_back(loop[(j + k) % m]);
    table.Set(cyclic, PeakedDistribution(v, loop[j], kFollowProb, kLoopEosProb));
  }
  Posteriorgram pg = RenderPosteriorgram(ref, cfg, rng, /*confusions=*/false);
  return {std::move(pg), std::move(table), JoinWords(words), loop};
}

decoder::DecoderWeights ReaderDecoderWeights(const Vocabulary& vocab, double focus,
                                             double sharpness) {
  const int n = vocab.size();
  decoder::HParams hp;
  hp.vocab_size = n;
  hp.dim = 3 * n + (3 * n) % 2;
  hp.heads = 1;
  hp.layers = 1;
  hp.ffn_dim = 1;
  hp.audio_dim = 3 * n;
  hp.Validate();
  const auto d = static_cast<size_t>(hp.dim);
  // Residual layout: [current token | evidence | previous token].
  const int ev = n, prev = 2 * n;
  // RMS-normalizing a row with k unit entries and multiplying by the k-gain
  // gives the row back.
  auto gain = [&](int k) { return std::sqrt(k / static_cast<double>(hp.dim) + 1e-6); };
  // Keeps the evidence small next to the one-hot tokens, so the final RMS
  // norm is nearly constant.
  constexpr double kEvidenceScale = 0.01;
  const double inv_scale = std::sqrt(static_cast<double>(d));  // undoes 1/sqrt(head_dim)

  decoder::DecoderWeights w;
  w.hparams = hp;
  w.embed = Matrix(n, d);
  for (int i = 0; i < n; ++i) w.embed(i, i) = 1.0;
  decoder::LayerWeights l;
  l.attn_norm.assign(d, gain(1));
  l.wq = l.wk = l.wv = l.wo = Matrix(d, d);
  // Constant query and key in the fastest rotary pairs; the key is turned
  // one position ahead, so the score peaks at the previous position.
  constexpr int kPairs = 16;
  constexpr double kSharpness = 6.0;
  const double amp = std::sqrt(kSharpness * inv_scale);
  for (int t = 0; t < n; ++t) {
    for (int i = 0; i < kPairs; ++i) {
      const double theta = std::pow(10000.0, -2.0 * i / hp.dim);
      l.wq(t, 2 * i) = amp;
      l.wk(t, 2 * i) = amp * std::cos(theta);
      l.wk(t, 2 * i + 1) = amp * std::sin(theta);
    }
    l.wv(t, prev + t) = 1.0;
    l.wo(prev + t, prev + t) = 1.0;
  }
  l.cross_norm.assign(d, gain(2));
  l.cross_wq = Matrix(d, d);
  l.cross_wk = Matrix(d, d);
  l.cross_wv = Matrix(d, d);
  l.cross_wo = Matrix(d, d);
  for (int i = 0; i < n; ++i) {
    l.cross_wq(i, n + i) = focus * inv_scale;            // current vs predecessor
    l.cross_wq(prev + i, 2 * n + i) = focus * inv_scale;  // previous vs the one before
    l.cross_wk(n + i, n + i) = 1.0;
    l.cross_wk(2 * n + i, 2 * n + i) = 1.0;
    l.cross_wv(i, i) = 1.0;
    l.cross_wo(i, ev + i) = kEvidenceScale;
  }
  l.ffn_norm.assign(d, 1.0);
  l.ffn_w1 = Matrix(d, 1);
  l.ffn_w2 = Matrix(1, d);
  w.layers.push_back(std::move(l));
  w.final_norm.assign(d, gain(2));
  constexpr double kExcluded = -30.0;  // blank and bos
  w.output = Matrix(d, n);
  for (int i = 0; i < n; ++i) w.output(ev + i, i) = sharpness / kEvidenceScale;
  for (int t = 0; t < n; ++t) {
    w.output(t, vocab.blank_id()) = kExcluded;
    w.output(t, vocab.bos_id()) = kExcluded;
  }
  Matrix proj(3 * n, d);
  for (int i = 0; i < 3 * n; ++i) proj(i, i) = 1.0;
  w.adapter_proj = std::move(proj);
  return w;
}

}  // namespace fusionkit::synth
