// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/search/scorer.h"

#include <stdexcept>

#include "fusionkit/core/log_math.h"
#include "fusionkit/ctc/ctc.h"

namespace fusionkit::search {
namespace {

struct PrefixStateBox : ScorerState {
  ctc::PrefixState s;
};

struct HistoryState : ScorerState {
  std::vector<int> history;
  std::vector<double> next;  // cached NextLogProbs(history)
};

struct DecoderStateBox : ScorerState {
  decoder::DecoderState s;
};

template <typename T>
const T& As(const ScorerState& state) {
  const T* p = dynamic_cast<const T*>(&state);
  if (p == nullptr) throw std::invalid_argument("scorer state of the wrong type");
  return *p;
}

// Difference of two log values, with -inf - -inf treated as -inf.
double LogDelta(double next, double prev) {
  if (next == kLogZero) return kLogZero;
  return next - prev;
}

}  // namespace

std::string_view ScorerKindName(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kDecoderAm: return "decoder_am";
    case ScorerKind::kDecoderLm: return "decoder_lm";
    case ScorerKind::kCtcPrefix: return "ctc_prefix";
    case ScorerKind::kNGram: return "ngram";
    case ScorerKind::kTable: return "table";
  }
  return "?";
}

CtcPrefixLabelScorer::CtcPrefixLabelScorer(std::string name,
                                           std::shared_ptr<const Posteriorgram> pg,
                                           const Vocabulary& vocab)
    : LabelScorer(std::move(name), ScorerKind::kCtcPrefix),
      pg_(pg),
      prefix_(pg, vocab.blank_id(), vocab.eos_id()),
      blank_(vocab.blank_id()),
      eos_(vocab.eos_id()) {
  if (static_cast<int>(pg_->vocab_size()) != vocab.size()) {
    throw std::invalid_argument("posteriorgram has " +
                                std::to_string(pg_->vocab_size()) +
                                " labels but the vocabulary has " +
                                std::to_string(vocab.size()));
  }
}

StatePtr CtcPrefixLabelScorer::Initial() const {
  auto box = std::make_shared<PrefixStateBox>();
  box->s = prefix_.Initial();
  return box;
}

void CtcPrefixLabelScorer::Score(const ScorerState& state,
                                 std::span<const int> candidates,
                                 std::span<double> out) const {
  const ctc::PrefixState& s = As<PrefixStateBox>(state).s;
  prefix_.Score(s, candidates, out);
  for (double& v : out) v = LogDelta(v, s.prefix_log_prob);
}

StatePtr CtcPrefixLabelScorer::Advance(const ScorerState& state, int label) const {
  auto box = std::make_shared<PrefixStateBox>();
  box->s = prefix_.Extend(As<PrefixStateBox>(state).s, label);
  return box;
}

double CtcPrefixLabelScorer::SequenceScore(std::span<const int> labels) const {
  return ctc::ForwardLogProb(*pg_, labels, blank_);
}

std::optional<std::vector<int>> CtcPrefixLabelScorer::SupportedLabels() const {
  std::vector<int> ids;
  for (size_t v = 0; v < pg_->vocab_size(); ++v) {
    const int id = static_cast<int>(v);
    if (id == blank_) continue;
    for (size_t t = 0; t < pg_->num_frames(); ++t) {
      if ((*pg_)(t, v) != kLogZero) {
        ids.push_back(id);
        break;
      }
    }
  }
  return ids;
}

LmLabelScorer::LmLabelScorer(std::string name, ScorerKind kind,
                             std::shared_ptr<const lm::LanguageModel> model,
                             const Vocabulary& vocab)
    : LabelScorer(std::move(name), kind), model_(std::move(model)) {
  if (!(model_->vocab() == vocab)) {
    throw std::invalid_argument(
        "language model vocabulary differs from the recognition vocabulary; "
        "use delayed fusion for mismatched vocabularies");
  }
}

StatePtr LmLabelScorer::Initial() const {
  auto st = std::make_shared<HistoryState>();
  st->next = model_->NextLogProbs(st->history);
  return st;
}

void LmLabelScorer::Score(const ScorerState& state, std::span<const int> candidates,
                          std::span<double> out) const {
  const HistoryState& s = As<HistoryState>(state);
  for (size_t i = 0; i < candidates.size(); ++i) out[i] = s.next.at(candidates[i]);
}

StatePtr LmLabelScorer::Advance(const ScorerState& state, int label) const {
  auto st = std::make_shared<HistoryState>();
  st->history = As<HistoryState>(state).history;
  st->history.push_back(label);
  st->next = model_->NextLogProbs(st->history);
  return st;
}

double LmLabelScorer::SequenceScore(std::span<const int> labels) const {
  return lm::SequenceLogProb(*model_, labels);
}

DecoderLabelScorer::DecoderLabelScorer(std::string name,
                                       std::shared_ptr<const decoder::Decoder> dec,
                                       std::shared_ptr<const Matrix> audio)
    : LabelScorer(std::move(name),
                  audio ? ScorerKind::kDecoderAm : ScorerKind::kDecoderLm),
      dec_(std::move(dec)),
      audio_(std::move(audio)) {}

StatePtr DecoderLabelScorer::Initial() const {
  auto box = std::make_shared<DecoderStateBox>();
  box->s = dec_->Start(audio_.get());
  return box;
}

void DecoderLabelScorer::Score(const ScorerState& state,
                               std::span<const int> candidates,
                               std::span<double> out) const {
  const auto& next = As<DecoderStateBox>(state).s.next_log_probs;
  for (size_t i = 0; i < candidates.size(); ++i) out[i] = next.at(candidates[i]);
}

StatePtr DecoderLabelScorer::Advance(const ScorerState& state, int label) const {
  auto box = std::make_shared<DecoderStateBox>();
  box->s = As<DecoderStateBox>(state).s;
  dec_->Step(box->s, label);
  return box;
}

double DecoderLabelScorer::SequenceScore(std::span<const int> labels) const {
  std::vector<int> full{dec_->bos_id()};
  full.insert(full.end(), labels.begin(), labels.end());
  full.push_back(dec_->eos_id());
  return -dec_->SeqCrossEntropy(audio_.get(), full);
}

}  // namespace fusionkit::search
