// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fusionkit/core/posteriorgram.h"

namespace fusionkit::ctc {

// Merges adjacent duplicates, then removes blanks.
std::vector<int> Collapse(std::span<const int> frame_labels, int blank);

// log of the total probability of all frame alignments that collapse to
// `target`. Returns -inf when no alignment fits in the available frames.
// `target` must not contain blank.
double ForwardLogProb(const Posteriorgram& pg, std::span<const int> target,
                      int blank);

// Collapse of the per-frame argmax (lowest id wins ties).
std::vector<int> GreedyDecode(const Posteriorgram& pg, int blank);

// 1-based group index per frame. Consecutive frames share an index when
// they have the same argmax label and both argmax probabilities reach the
// threshold.
struct MergeIndexMap {
  std::vector<int> indices;
  // Unset for maps that were not produced by thresholding.
  std::optional<double> threshold;

  size_t num_frames() const { return indices.size(); }
  int num_groups() const { return indices.empty() ? 0 : indices.back(); }
};

MergeIndexMap MergeIndices(const Posteriorgram& pg, double threshold);
MergeIndexMap IdentityMergeMap(size_t num_frames);

// Mean-pools encoder frames that share a group index.
EncoderOutput CompressEncoder(const EncoderOutput& enc,
                              const MergeIndexMap& map);

// Max-pools probabilities within each group and renormalizes. Groups of a
// single frame are copied unchanged.
Posteriorgram CompressPosteriors(const Posteriorgram& pg,
                                 const MergeIndexMap& map);

// Labels kept by top-k pruning, ascending. Labels are ranked by their
// maximum probability over time (ties to the lower id). With keep_blank the
// blank label always occupies one of the k slots.
std::vector<int> TopKLabels(const Posteriorgram& pg, int k, int blank,
                            bool keep_blank = true);

// Zeroes every label outside TopKLabels and renormalizes each frame. k
// equal to the vocabulary size returns the input unchanged. A frame with no
// mass on any kept label becomes uniform over the kept labels.
Posteriorgram TopKPrune(const Posteriorgram& pg, int k, int blank,
                        bool keep_blank = true);

}  // namespace fusionkit::ctc
