// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fusionkit {

// Token inventory shared by posteriorgrams, language models and decoders.
//
// File format: one token per line, `<token>\t<flags>`, where flags is a
// comma-separated subset of {blank, bos, eos, unk, word_begin}. The line
// number (0-based) is the token id. Token strings may not contain
// whitespace.
//
// A token string starting with U+2581 ("▁") has that marker stripped from
// its surface form; the marker only keeps begin/continuation variants of
// the same text distinct.
class Vocabulary {
 public:
  struct Entry {
    std::string token;
    bool blank = false;
    bool bos = false;
    bool eos = false;
    bool unk = false;
    bool word_begin = false;
  };

  // Validates: unique non-empty tokens, exactly one blank, bos and eos each
  // on distinct ids, at most one unk.
  explicit Vocabulary(std::vector<Entry> entries);

  static Vocabulary Read(std::istream& in);
  static Vocabulary Load(const std::filesystem::path& path);
  void Write(std::ostream& out) const;
  void Save(const std::filesystem::path& path) const;

  int size() const { return static_cast<int>(entries_.size()); }
  int blank_id() const { return blank_id_; }
  int bos_id() const { return bos_id_; }
  int eos_id() const { return eos_id_; }
  std::optional<int> unk_id() const { return unk_id_; }

  const std::string& token(int id) const { return entries_.at(id).token; }
  std::string_view Surface(int id) const;
  bool begins_word(int id) const { return entries_.at(id).word_begin; }
  // True if at least one token carries the word_begin flag.
  bool has_word_flags() const { return has_word_flags_; }
  // blank, bos or eos.
  bool IsSpecial(int id) const {
    return id == blank_id_ || id == bos_id_ || id == eos_id_;
  }

  std::optional<int> Find(std::string_view token) const;
  // Ids a recognizer may emit as ordinary labels (everything except
  // blank/bos/eos), ascending.
  std::vector<int> EmittableLabels() const;
  // Ids a language model predicts: everything except blank and bos.
  std::vector<int> LmOutcomes() const;

  std::string Join(std::span<const int> ids) const;

  bool operator==(const Vocabulary& other) const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> index_;
  int blank_id_ = -1;
  int bos_id_ = -1;
  int eos_id_ = -1;
  std::optional<int> unk_id_;
  bool has_word_flags_ = false;
};

}  // namespace fusionkit
