// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/lm/retokenize.h"

#include <algorithm>

#include "fusionkit/core/text.h"

namespace fusionkit::lm {

Retokenizer::Retokenizer(const Vocabulary& vocab) : vocab_(&vocab) {
  const bool flags = vocab.has_word_flags();
  for (int id : vocab.EmittableLabels()) {
    if (vocab.unk_id() == id) continue;
    const std::string surface(vocab.Surface(id));
    max_piece_bytes_ = std::max(max_piece_bytes_, surface.size());
    if (!flags || vocab.begins_word(id)) begin_pieces_.emplace(surface, id);
    if (!flags || !vocab.begins_word(id)) inner_pieces_.emplace(surface, id);
  }
}

std::vector<int> Retokenizer::Word(std::string_view word) const {
  std::vector<int> ids;
  size_t pos = 0;
  while (pos < word.size()) {
    const auto& pieces = ids.empty() ? begin_pieces_ : inner_pieces_;
    int match = -1;
    size_t len = std::min(max_piece_bytes_, word.size() - pos);
    for (; len > 0; --len) {
      auto it = pieces.find(std::string(word.substr(pos, len)));
      if (it != pieces.end()) {
        match = it->second;
        break;
      }
    }
    if (match < 0) {
      if (!vocab_->unk_id()) {
        throw UnsegmentableError("cannot segment word '" + std::string(word) +
                                 "' and the vocabulary has no unk token");
      }
      return {*vocab_->unk_id()};
    }
    ids.push_back(match);
    pos += len;
  }
  return ids;
}

std::vector<int> Retokenizer::Text(std::string_view text) const {
  std::vector<int> ids;
  for (const std::string& w : SplitWhitespace(text)) {
    const auto piece = Word(w);
    ids.insert(ids.end(), piece.begin(), piece.end());
  }
  return ids;
}

std::vector<int> RetokenizeWord(const Vocabulary& vocab, std::string_view word) {
  return Retokenizer(vocab).Word(word);
}

std::vector<int> Retokenize(const Vocabulary& vocab, std::string_view text) {
  return Retokenizer(vocab).Text(text);
}

bool StartsWord(const Vocabulary& vocab, int id) {
  return !vocab.has_word_flags() || vocab.begins_word(id) || vocab.unk_id() == id;
}

std::vector<std::string> Detokenize(const Vocabulary& vocab,
                                    std::span<const int> ids) {
  std::vector<std::string> words;
  for (int id : ids) {
    if (vocab.IsSpecial(id)) continue;
    const std::string_view piece =
        vocab.unk_id() == id ? std::string_view(vocab.token(id)) : vocab.Surface(id);
    if (words.empty() || StartsWord(vocab, id)) {
      words.emplace_back(piece);
    } else {
      words.back() += piece;
    }
  }
  return words;
}

std::string DetokenizeText(const Vocabulary& vocab, std::span<const int> ids) {
  std::string out;
  for (const auto& w : Detokenize(vocab, ids)) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

}  // namespace fusionkit::lm
