// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/decoder/weights.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fusionkit/core/errors.h"
#include "fusionkit/core/rng.h"

namespace fusionkit::decoder {
namespace {

Matrix RandomMatrix(Rng& rng, size_t rows, size_t cols, double scale) {
  Matrix m(rows, cols);
  for (double& v : m.data()) {
    v = static_cast<float>(rng.Uniform(-scale, scale));
  }
  return m;
}

std::string LayerName(int i, const char* field) {
  return "layer" + std::to_string(i) + "." + field;
}

}  // namespace

void HParams::Validate() const {
  if (vocab_size < 3 || dim < 2 || heads < 1 || layers < 0 || ffn_dim < 1 ||
      audio_dim < 0) {
    throw std::invalid_argument("decoder hyperparameters out of range");
  }
  if (dim % heads != 0 || head_dim() % 2 != 0) {
    throw std::invalid_argument("decoder dim must split into even-sized heads");
  }
}

DecoderWeights DecoderWeights::Random(const HParams& hp, uint64_t seed) {
  hp.Validate();
  Rng rng(seed);
  const double d_scale = std::sqrt(3.0 / hp.dim);
  const double f_scale = std::sqrt(3.0 / hp.ffn_dim);
  DecoderWeights w;
  w.hparams = hp;
  w.embed = RandomMatrix(rng, hp.vocab_size, hp.dim, 1.0);
  for (int i = 0; i < hp.layers; ++i) {
    LayerWeights l;
    l.attn_norm.assign(hp.dim, 1.0);
    l.wq = RandomMatrix(rng, hp.dim, hp.dim, d_scale);
    l.wk = RandomMatrix(rng, hp.dim, hp.dim, d_scale);
    l.wv = RandomMatrix(rng, hp.dim, hp.dim, d_scale);
    l.wo = RandomMatrix(rng, hp.dim, hp.dim, d_scale);
    l.cross_norm.assign(hp.dim, 1.0);
    l.cross_wq = RandomMatrix(rng, hp.dim, hp.dim, d_scale);
    l.cross_wk = RandomMatrix(rng, hp.dim, hp.dim, d_scale);
    l.cross_wv = RandomMatrix(rng, hp.dim, hp.dim, d_scale);
    l.cross_wo = RandomMatrix(rng, hp.dim, hp.dim, d_scale);
    l.ffn_norm.assign(hp.dim, 1.0);
    l.ffn_w1 = RandomMatrix(rng, hp.dim, hp.ffn_dim, d_scale);
    l.ffn_w2 = RandomMatrix(rng, hp.ffn_dim, hp.dim, f_scale);
    w.layers.push_back(std::move(l));
  }
  w.final_norm.assign(hp.dim, 1.0);
  w.output = RandomMatrix(rng, hp.dim, hp.vocab_size, d_scale);
  if (hp.audio_dim > 0) {
    w.adapter_proj =
        RandomMatrix(rng, hp.audio_dim, hp.dim, std::sqrt(3.0 / hp.audio_dim));
  }
  return w;
}

TensorArchive DecoderWeights::ToArchive() const {
  TensorArchive a;
  a.AddVector("meta.hparams",
              {double(hparams.vocab_size), double(hparams.dim), double(hparams.heads),
               double(hparams.layers), double(hparams.ffn_dim),
               double(hparams.audio_dim)});
  a.AddMatrix("embed", embed);
  for (int i = 0; i < static_cast<int>(layers.size()); ++i) {
    const LayerWeights& l = layers[i];
    a.AddVector(LayerName(i, "attn_norm"), l.attn_norm);
    a.AddMatrix(LayerName(i, "wq"), l.wq);
    a.AddMatrix(LayerName(i, "wk"), l.wk);
    a.AddMatrix(LayerName(i, "wv"), l.wv);
    a.AddMatrix(LayerName(i, "wo"), l.wo);
    a.AddVector(LayerName(i, "cross_norm"), l.cross_norm);
    a.AddMatrix(LayerName(i, "cross_wq"), l.cross_wq);
    a.AddMatrix(LayerName(i, "cross_wk"), l.cross_wk);
    a.AddMatrix(LayerName(i, "cross_wv"), l.cross_wv);
    a.AddMatrix(LayerName(i, "cross_wo"), l.cross_wo);
    a.AddVector(LayerName(i, "ffn_norm"), l.ffn_norm);
    a.AddMatrix(LayerName(i, "ffn_w1"), l.ffn_w1);
    a.AddMatrix(LayerName(i, "ffn_w2"), l.ffn_w2);
  }
  a.AddVector("final_norm", final_norm);
  a.AddMatrix("output", output);
  if (adapter_proj) a.AddMatrix("adapter.proj", *adapter_proj);
  return a;
}

DecoderWeights DecoderWeights::FromArchive(const TensorArchive& a) {
  const auto meta = a.GetVector("meta.hparams", 6);
  for (double v : meta) {
    if (v != std::floor(v) || v < 0 || v > 1e7) {
      throw FormatError("meta.hparams holds a non-integer value");
    }
  }
  DecoderWeights w;
  HParams& hp = w.hparams;
  hp.vocab_size = static_cast<int>(meta[0]);
  hp.dim = static_cast<int>(meta[1]);
  hp.heads = static_cast<int>(meta[2]);
  hp.layers = static_cast<int>(meta[3]);
  hp.ffn_dim = static_cast<int>(meta[4]);
  hp.audio_dim = static_cast<int>(meta[5]);
  try {
    hp.Validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  const size_t V = hp.vocab_size, D = hp.dim, F = hp.ffn_dim;
  w.embed = a.GetMatrix("embed", V, D);
  for (int i = 0; i < hp.layers; ++i) {
    LayerWeights l;
    l.attn_norm = a.GetVector(LayerName(i, "attn_norm"), D);
    l.wq = a.GetMatrix(LayerName(i, "wq"), D, D);
    l.wk = a.GetMatrix(LayerName(i, "wk"), D, D);
    l.wv = a.GetMatrix(LayerName(i, "wv"), D, D);
    l.wo = a.GetMatrix(LayerName(i, "wo"), D, D);
    l.cross_norm = a.GetVector(LayerName(i, "cross_norm"), D);
    l.cross_wq = a.GetMatrix(LayerName(i, "cross_wq"), D, D);
    l.cross_wk = a.GetMatrix(LayerName(i, "cross_wk"), D, D);
    l.cross_wv = a.GetMatrix(LayerName(i, "cross_wv"), D, D);
    l.cross_wo = a.GetMatrix(LayerName(i, "cross_wo"), D, D);
    l.ffn_norm = a.GetVector(LayerName(i, "ffn_norm"), D);
    l.ffn_w1 = a.GetMatrix(LayerName(i, "ffn_w1"), D, F);
    l.ffn_w2 = a.GetMatrix(LayerName(i, "ffn_w2"), F, D);
    w.layers.push_back(std::move(l));
  }
  w.final_norm = a.GetVector("final_norm", D);
  w.output = a.GetMatrix("output", D, V);
  if (hp.audio_dim > 0) {
    w.adapter_proj = a.GetMatrix("adapter.proj", hp.audio_dim, D);
  }
  return w;
}

void DecoderWeights::Save(const std::filesystem::path& path) const {
  ToArchive().Save(path);
}

DecoderWeights DecoderWeights::Load(const std::filesystem::path& path) {
  return FromArchive(TensorArchive::Load(path));
}

}  // namespace fusionkit::decoder
