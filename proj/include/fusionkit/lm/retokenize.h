// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fusionkit/core/vocabulary.h"

namespace fusionkit::lm {

class UnsegmentableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Greedy longest-match segmentation of words into the tokens of a target
// vocabulary.
//
// When the vocabulary carries word_begin flags, the first piece of a word
// must be a word_begin token and the remaining pieces must not be. Without
// flags any token may appear anywhere. A word that cannot be segmented
// becomes a single unk token, or throws UnsegmentableError if the
// vocabulary has none.
class Retokenizer {
 public:
  explicit Retokenizer(const Vocabulary& vocab);

  std::vector<int> Word(std::string_view word) const;
  // Splits on whitespace and segments each word.
  std::vector<int> Text(std::string_view text) const;

  const Vocabulary& vocab() const { return *vocab_; }

 private:
  const Vocabulary* vocab_;
  std::unordered_map<std::string, int> begin_pieces_;
  std::unordered_map<std::string, int> inner_pieces_;
  size_t max_piece_bytes_ = 0;
};

// One-shot helpers; see Retokenizer.
std::vector<int> RetokenizeWord(const Vocabulary& vocab, std::string_view word);

// Splits `text` on whitespace and retokenizes every word.
std::vector<int> Retokenize(const Vocabulary& vocab, std::string_view text);

// Groups token ids into words: a word starts at the first token and at every
// token for which StartsWord holds.
// Special ids are skipped.
std::vector<std::string> Detokenize(const Vocabulary& vocab,
                                    std::span<const int> ids);

// Detokenize joined with single spaces.
std::string DetokenizeText(const Vocabulary& vocab, std::span<const int> ids);

// True if `id` opens a new word when appended after a non-empty sequence.
// unk always stands for a whole word.
bool StartsWord(const Vocabulary& vocab, int id);

}  // namespace fusionkit::lm
