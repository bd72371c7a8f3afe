// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/eval/wer.h"

#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "fusionkit/core/text.h"

namespace fusionkit::eval {

double AlignmentCounts::wer() const {
  if (ref_words == 0) throw std::invalid_argument("WER undefined for an empty reference");
  return static_cast<double>(errors()) / static_cast<double>(ref_words);
}

AlignmentCounts& AlignmentCounts::operator+=(const AlignmentCounts& other) {
  substitutions += other.substitutions;
  deletions += other.deletions;
  insertions += other.insertions;
  ref_words += other.ref_words;
  return *this;
}

namespace {

// (total, insertions, deletions), compared lexicographically. Substitutions
// follow from the other three, so this order fixes the tie rule.
struct Cost {
  size_t total = 0, ins = 0, del = 0;
  bool operator<(const Cost& o) const {
    return std::tie(total, ins, del) < std::tie(o.total, o.ins, o.del);
  }
};

}  // namespace

AlignmentCounts Align(const std::vector<std::string>& ref,
                      const std::vector<std::string>& hyp) {
  const size_t n = ref.size(), m = hyp.size();
  std::vector<Cost> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = {j, j, 0};
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = {i, 0, i};
    for (size_t j = 1; j <= m; ++j) {
      Cost diag = prev[j - 1];
      if (ref[i - 1] != hyp[j - 1]) ++diag.total;
      Cost del = prev[j];
      ++del.total, ++del.del;
      Cost ins = cur[j - 1];
      ++ins.total, ++ins.ins;
      Cost best = diag;
      if (del < best) best = del;
      if (ins < best) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  const Cost& c = prev[m];
  AlignmentCounts out;
  out.insertions = c.ins;
  out.deletions = c.del;
  out.substitutions = c.total - c.ins - c.del;
  out.ref_words = n;
  return out;
}

AlignmentCounts CorpusWer(const std::vector<TranscriptPair>& pairs) {
  AlignmentCounts total;
  for (const auto& [ref, hyp] : pairs) {
    total += Align(SplitWhitespace(ref), SplitWhitespace(hyp));
  }
  if (total.ref_words == 0) throw std::invalid_argument("empty reference corpus");
  return total;
}

NormalizationMode ParseNormalizationMode(std::string_view name) {
  if (name == "none") return NormalizationMode::kNone;
  if (name == "lowercase") return NormalizationMode::kLowercase;
  throw std::invalid_argument(fmt::format("unknown normalization mode '{}'", name));
}

char32_t FoldCase(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 0x20;
  // Latin Extended-A: alternating upper/lower pairs, with the odd stretch
  // 0x139-0x148 and 0x179-0x17E offset by one.
  if (cp >= 0x100 && cp <= 0x137) return cp | 1;
  if (cp >= 0x139 && cp <= 0x148) return (cp & 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return cp | 1;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp & 1) ? cp + 1 : cp;
  // Greek.
  if (cp == 0x386) return 0x3AC;
  if (cp >= 0x388 && cp <= 0x38A) return cp + 0x25;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 0x3F;
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;
  if (cp == 0x3C2) return 0x3C3;  // final sigma
  // Cyrillic.
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x460 && cp <= 0x481) return cp | 1;
  if (cp >= 0x48A && cp <= 0x4BF) return cp | 1;
  if (cp >= 0x4D0 && cp <= 0x52F) return cp | 1;
  // Armenian.
  if (cp >= 0x531 && cp <= 0x556) return cp + 0x30;
  return cp;
}

std::string NormalizeText(std::string_view text, NormalizationMode mode) {
  if (mode == NormalizationMode::kNone) return std::string(text);
  std::u32string folded = DecodeUtf8(text);
  for (char32_t& cp : folded) cp = FoldCase(cp);
  std::string out;
  for (const auto& word : SplitWhitespace(EncodeUtf8(folded))) {
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

std::string FormatWer(const AlignmentCounts& counts) {
  return fmt::format("{:.2f}", 100.0 * counts.wer());
}

}  // namespace fusionkit::eval
