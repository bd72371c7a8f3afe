// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fusionkit/core/matrix.h"
#include "fusionkit/core/posteriorgram.h"

namespace fusionkit::decoder {

enum class Downsample { kConcat, kCtcCompress };

struct AdapterConfig {
  Downsample downsample = Downsample::kConcat;
  int factor = 1;          // kConcat
  double threshold = 1.0;  // kCtcCompress; values above 1 merge nothing
  // Optional [input dim, output dim] map applied after downsampling.
  const Matrix* projection = nullptr;
};

// kConcat stacks `factor` consecutive frames (output length ceil(T/f), the
// last frame zero-padded). kCtcCompress averages frames that share a CTC
// merge index computed from `pg`, which must have one row per frame.
// Throws std::invalid_argument for a bad config, a missing or misaligned
// posteriorgram, or a projection whose row count differs from the width.
EncoderOutput ApplyAdapter(const EncoderOutput& enc, const AdapterConfig& config,
                           const Posteriorgram* pg = nullptr);

}  // namespace fusionkit::decoder
