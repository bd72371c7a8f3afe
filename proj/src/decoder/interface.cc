// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/decoder/interface.h"

#include <stdexcept>
#include <string>

namespace fusionkit::decoder {

InterfaceKind ParseInterfaceKind(std::string_view name) {
  if (name == "aed") return InterfaceKind::kAed;
  if (name == "prefix") return InterfaceKind::kPrefix;
  if (name == "merged") return InterfaceKind::kMerged;
  throw std::invalid_argument("unknown interface kind '" + std::string(name) +
                              "' (expected aed, prefix or merged)");
}

std::string_view InterfaceKindName(InterfaceKind kind) {
  switch (kind) {
    case InterfaceKind::kAed: return "aed";
    case InterfaceKind::kPrefix: return "prefix";
    case InterfaceKind::kMerged: return "merged";
  }
  return "?";
}

void InterfaceConfig::Validate() const {
  if (prefix_attention == PrefixAttention::kBidirectional &&
      kind != InterfaceKind::kPrefix) {
    throw std::invalid_argument(
        "bidirectional prefix attention requires the prefix interface");
  }
}

AttentionMask BuildAttentionMask(const InterfaceConfig& config, size_t prefix_len,
                                 size_t text_len) {
  config.Validate();
  switch (config.kind) {
    case InterfaceKind::kPrefix: {
      const size_t n = prefix_len + text_len;
      const bool bidir = config.prefix_attention == PrefixAttention::kBidirectional;
      AttentionMask mask(n, n);
      for (size_t r = 0; r < n; ++r) {
        const size_t limit = (bidir && r < prefix_len) ? prefix_len : r + 1;
        for (size_t c = 0; c < limit; ++c) mask.Allow(r, c);
      }
      return mask;
    }
    case InterfaceKind::kMerged: {
      AttentionMask mask(text_len, prefix_len + text_len);
      for (size_t r = 0; r < text_len; ++r) {
        for (size_t c = 0; c <= prefix_len + r; ++c) mask.Allow(r, c);
      }
      return mask;
    }
    case InterfaceKind::kAed: {
      AttentionMask mask(text_len, text_len);
      for (size_t r = 0; r < text_len; ++r) {
        for (size_t c = 0; c <= r; ++c) mask.Allow(r, c);
      }
      return mask;
    }
  }
  throw std::invalid_argument("unknown interface kind");
}

}  // namespace fusionkit::decoder
