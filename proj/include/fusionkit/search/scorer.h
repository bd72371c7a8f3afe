// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fusionkit/core/matrix.h"
#include "fusionkit/core/posteriorgram.h"
#include "fusionkit/core/vocabulary.h"
#include "fusionkit/ctc/prefix_scorer.h"
#include "fusionkit/decoder/decoder.h"
#include "fusionkit/lm/language_model.h"

namespace fusionkit::search {

enum class ScorerKind { kDecoderAm, kDecoderLm, kCtcPrefix, kNGram, kTable };

std::string_view ScorerKindName(ScorerKind kind);

class ScorerState {
 public:
  virtual ~ScorerState() = default;
};

using StatePtr = std::shared_ptr<const ScorerState>;

// A left-to-right label scorer for label-synchronous search. All scores are
// natural-log increments log p(c | prefix); the eos id scores termination.
class LabelScorer {
 public:
  LabelScorer(std::string name, ScorerKind kind)
      : name_(std::move(name)), kind_(kind) {}
  virtual ~LabelScorer() = default;

  const std::string& name() const { return name_; }
  ScorerKind kind() const { return kind_; }

  virtual StatePtr Initial() const = 0;
  virtual void Score(const ScorerState& state, std::span<const int> candidates,
                     std::span<double> out) const = 0;
  virtual StatePtr Advance(const ScorerState& state, int label) const = 0;
  // Total log-score of `labels` followed by EOS, computed without the
  // incremental path.
  virtual double SequenceScore(std::span<const int> labels) const = 0;
  // Labels with nonzero probability; nullopt means every label.
  virtual std::optional<std::vector<int>> SupportedLabels() const {
    return std::nullopt;
  }

 private:
  std::string name_;
  ScorerKind kind_;
};

using ScorerList = std::vector<std::shared_ptr<const LabelScorer>>;

// CTC prefix scores: increments log psi(g.c) - log psi(g), and for EOS
// log P(output == g) - log psi(g).
class CtcPrefixLabelScorer : public LabelScorer {
 public:
  CtcPrefixLabelScorer(std::string name, std::shared_ptr<const Posteriorgram> pg,
                       const Vocabulary& vocab);

  StatePtr Initial() const override;
  void Score(const ScorerState& state, std::span<const int> candidates,
             std::span<double> out) const override;
  StatePtr Advance(const ScorerState& state, int label) const override;
  double SequenceScore(std::span<const int> labels) const override;
  std::optional<std::vector<int>> SupportedLabels() const override;

 private:
  std::shared_ptr<const Posteriorgram> pg_;
  ctc::PrefixScorer prefix_;
  int blank_;
  int eos_;
};

// Wraps a language model over the same vocabulary as the search.
class LmLabelScorer : public LabelScorer {
 public:
  // `kind` is kNGram or kTable. Throws std::invalid_argument if the model
  // vocabulary differs from `vocab`.
  LmLabelScorer(std::string name, ScorerKind kind,
                std::shared_ptr<const lm::LanguageModel> model,
                const Vocabulary& vocab);

  StatePtr Initial() const override;
  void Score(const ScorerState& state, std::span<const int> candidates,
             std::span<double> out) const override;
  StatePtr Advance(const ScorerState& state, int label) const override;
  double SequenceScore(std::span<const int> labels) const override;

 private:
  std::shared_ptr<const lm::LanguageModel> model_;
};

// The attention decoder, as an acoustic model (with audio) or as a language
// model (audio == nullptr, "without the encoder output").
class DecoderLabelScorer : public LabelScorer {
 public:
  DecoderLabelScorer(std::string name, std::shared_ptr<const decoder::Decoder> dec,
                     std::shared_ptr<const Matrix> audio);

  StatePtr Initial() const override;
  void Score(const ScorerState& state, std::span<const int> candidates,
             std::span<double> out) const override;
  StatePtr Advance(const ScorerState& state, int label) const override;
  double SequenceScore(std::span<const int> labels) const override;

 private:
  std::shared_ptr<const decoder::Decoder> dec_;
  std::shared_ptr<const Matrix> audio_;
};

}  // namespace fusionkit::search
