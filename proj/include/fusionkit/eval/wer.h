// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fusionkit::eval {

struct AlignmentCounts {
  size_t substitutions = 0;
  size_t deletions = 0;
  size_t insertions = 0;
  size_t ref_words = 0;

  size_t errors() const { return substitutions + deletions + insertions; }
  // Fraction, not percent. Throws std::invalid_argument when ref_words is 0.
  double wer() const;

  AlignmentCounts& operator+=(const AlignmentCounts& other);
  bool operator==(const AlignmentCounts&) const = default;
};

// Unit-cost Levenshtein alignment. Among minimal-cost alignments the one
// with the fewest insertions wins, then the fewest deletions.
AlignmentCounts Align(const std::vector<std::string>& ref,
                      const std::vector<std::string>& hyp);

using TranscriptPair = std::pair<std::string, std::string>;  // (ref, hyp)

// Pools counts over whitespace-split pairs. Throws std::invalid_argument if
// the references hold no words at all.
AlignmentCounts CorpusWer(const std::vector<TranscriptPair>& pairs);

enum class NormalizationMode { kNone, kLowercase };

NormalizationMode ParseNormalizationMode(std::string_view name);

// kLowercase: simple case folding plus whitespace collapse (runs of Unicode
// whitespace become one ASCII space, ends trimmed).
std::string NormalizeText(std::string_view text, NormalizationMode mode);

// Lowercase-folds one code point. Covers Latin, Greek, Cyrillic and
// Armenian; other scripts pass through.
char32_t FoldCase(char32_t cp);

// WER as a percentage with two decimals, e.g. "12.50".
std::string FormatWer(const AlignmentCounts& counts);

}  // namespace fusionkit::eval
