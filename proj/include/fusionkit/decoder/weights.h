// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "fusionkit/core/matrix.h"
#include "fusionkit/decoder/tensor_archive.h"

namespace fusionkit::decoder {

struct HParams {
  int vocab_size = 0;
  int dim = 32;
  int heads = 2;
  int layers = 2;
  int ffn_dim = 64;
  // Input width of the adapter projection; 0 means no projection tensor.
  int audio_dim = 0;

  int head_dim() const { return dim / heads; }
  // Throws std::invalid_argument; dim/heads must be an even integer.
  void Validate() const;
};

struct LayerWeights {
  std::vector<double> attn_norm;
  Matrix wq, wk, wv, wo;  // [D, D], applied as x * W
  std::vector<double> cross_norm;
  Matrix cross_wq, cross_wk, cross_wv, cross_wo;
  std::vector<double> ffn_norm;
  Matrix ffn_w1;  // [D, F]
  Matrix ffn_w2;  // [F, D]
};

// Tensor names in the archive:
//   meta.hparams [6] = V, D, H, L, F, audio_dim
//   embed [V, D]
//   layer<i>.{attn_norm, wq, wk, wv, wo, cross_norm, cross_wq, cross_wk,
//             cross_wv, cross_wo, ffn_norm, ffn_w1, ffn_w2}
//   final_norm [D], output [D, V], adapter.proj [audio_dim, D] (optional)
// Values are f32 on disk and in the seeded generator, so a save/load round
// trip is exact.
struct DecoderWeights {
  HParams hparams;
  Matrix embed;
  std::vector<LayerWeights> layers;
  std::vector<double> final_norm;
  Matrix output;
  std::optional<Matrix> adapter_proj;

  static DecoderWeights Random(const HParams& hparams, uint64_t seed);

  TensorArchive ToArchive() const;
  static DecoderWeights FromArchive(const TensorArchive& archive);
  void Save(const std::filesystem::path& path) const;
  static DecoderWeights Load(const std::filesystem::path& path);
};

}  // namespace fusionkit::decoder
