// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace fusionkit::decoder {

enum class InterfaceKind { kAed, kPrefix, kMerged };
enum class PrefixAttention { kCausal, kBidirectional };

InterfaceKind ParseInterfaceKind(std::string_view name);
std::string_view InterfaceKindName(InterfaceKind kind);

struct InterfaceConfig {
  InterfaceKind kind = InterfaceKind::kPrefix;
  PrefixAttention prefix_attention = PrefixAttention::kCausal;
  // Token ids placed between the audio prefix and BOS.
  std::vector<int> prompt;

  // Bidirectional prefix attention is only meaningful for the prefix kind.
  void Validate() const;
};

class AttentionMask {
 public:
  AttentionMask(size_t rows, size_t cols) : rows_(rows), cols_(cols), allowed_(rows * cols, 0) {}

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  bool operator()(size_t r, size_t c) const { return allowed_[r * cols_ + c] != 0; }
  void Allow(size_t r, size_t c) { allowed_[r * cols_ + c] = 1; }

  bool operator==(const AttentionMask& other) const = default;

 private:
  size_t rows_;
  size_t cols_;
  std::vector<uint8_t> allowed_;
};

// Self-attention mask; true means the query row may attend to the key.
//   prefix: (P+S) x (P+S). Text rows see the whole prefix and earlier text;
//           prefix rows are causal or see the whole prefix block.
//   merged: S x (P+S). Only text rows issue queries; keys are the prefix
//           followed by the causally masked text.
//   aed:    S x S causal; the audio is reached through cross-attention.
AttentionMask BuildAttentionMask(const InterfaceConfig& config, size_t prefix_len,
                                 size_t text_len);

}  // namespace fusionkit::decoder
