// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fusionkit/core/matrix.h"
#include "fusionkit/decoder/interface.h"
#include "fusionkit/decoder/tensor_archive.h"
#include "fusionkit/decoder/weights.h"

namespace fusionkit::decoder {

// Per-hypothesis incremental state. Plain values, so copying clones it.
struct DecoderState {
  struct LayerCache {
    std::vector<std::vector<double>> keys;  // rotated
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> cross_keys;
    std::vector<std::vector<double>> cross_values;
  };
  std::vector<LayerCache> layers;
  size_t position = 0;     // rotary position of the next input
  size_t num_labels = 0;   // labels fed so far, BOS included
  std::vector<double> next_log_probs;
  const void* owner = nullptr;
};

struct AttentionExport {
  // Per layer, per head: rows follow the mask rows, columns the keys.
  std::vector<std::vector<Matrix>> self;
  std::vector<std::vector<Matrix>> cross;  // aed only
  AttentionMask mask{0, 0};

  // Names layer<i>.head<j> and layer<i>.cross.head<j>.
  TensorArchive ToArchive() const;
};

// Pre-norm transformer decoder (RMSNorm, SiLU FFN, rotary positions over a
// single stream: audio prefix, prompt, BOS, labels).
//
// `audio` holds already adapted frames of width D. nullptr means no audio:
// prefix and merged kinds then run as a plain causal decoder, and aed
// throws. A zero-row matrix is an empty prefix for every kind.
class Decoder {
 public:
  Decoder(std::shared_ptr<const DecoderWeights> weights, InterfaceConfig config,
          int bos_id, int eos_id);

  const DecoderWeights& weights() const { return *weights_; }
  const InterfaceConfig& config() const { return config_; }

  int bos_id() const { return bos_id_; }
  int eos_id() const { return eos_id_; }

  // `labels` starts with BOS. Row s is log p(. | labels[0..s], audio).
  Matrix Forward(const Matrix* audio, std::span<const int> labels) const;

  AttentionExport ExportAttention(const Matrix* audio,
                                  std::span<const int> labels) const;

  // -sum_s log p(labels[s] | labels[0..s-1]); labels run BOS .. EOS.
  double SeqCrossEntropy(const Matrix* audio, std::span<const int> labels) const;

  // Consumes audio, prompt and BOS; next_log_probs then scores the first
  // label.
  DecoderState Start(const Matrix* audio) const;
  void Step(DecoderState& state, int label) const;

 private:
  struct FullPass;
  FullPass Run(const Matrix* audio, std::span<const int> labels,
               bool keep_attention) const;
  void CheckAudio(const Matrix* audio) const;
  void CheckLabel(int id) const;
  void Feed(DecoderState& state, int token, bool emit) const;

  std::shared_ptr<const DecoderWeights> weights_;
  InterfaceConfig config_;
  int bos_id_;
  int eos_id_;
};

}  // namespace fusionkit::decoder
