// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/decoder/decoder.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fusionkit/core/log_math.h"

namespace fusionkit::decoder {

using Vec = std::vector<double>;

namespace {

constexpr double kNormEps = 1e-6;
constexpr double kRopeBase = 10000.0;

Vec MatVec(std::span<const double> x, const Matrix& w) {
  Vec y(w.cols(), 0.0);
  for (size_t i = 0; i < w.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const auto row = w.Row(i);
    for (size_t j = 0; j < y.size(); ++j) y[j] += xi * row[j];
  }
  return y;
}

Vec RmsNorm(std::span<const double> x, const Vec& gain) {
  double ss = 0.0;
  for (double v : x) ss += v * v;
  const double inv = 1.0 / std::sqrt(ss / static_cast<double>(x.size()) + kNormEps);
  Vec y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] * inv * gain[i];
  return y;
}

void Rope(Vec& v, size_t pos, int heads) {
  const size_t hd = v.size() / heads;
  for (int h = 0; h < heads; ++h) {
    for (size_t i = 0; i < hd / 2; ++i) {
      const double theta = static_cast<double>(pos) *
                           std::pow(kRopeBase, -2.0 * static_cast<double>(i) / hd);
      const double c = std::cos(theta), s = std::sin(theta);
      double& a = v[h * hd + 2 * i];
      double& b = v[h * hd + 2 * i + 1];
      const double a0 = a, b0 = b;
      a = a0 * c - b0 * s;
      b = a0 * s + b0 * c;
    }
  }
}

void AddInPlace(std::span<double> x, const Vec& y) {
  for (size_t i = 0; i < x.size(); ++i) x[i] += y[i];
}

Vec Ffn(std::span<const double> x, const LayerWeights& l) {
  Vec h = MatVec(RmsNorm(x, l.ffn_norm), l.ffn_w1);
  for (double& v : h) v = v / (1.0 + std::exp(-v));
  return MatVec(h, l.ffn_w2);
}

// Multi-head attention of one query over the keys whose `allowed` flag is
// set. Returns the concatenated head outputs; per-head weights go to
// `weights_out` (one row per head, zeros at disallowed keys) when given.
Vec Attend(const Vec& q, const std::vector<Vec>& keys, const std::vector<Vec>& values,
           const std::vector<bool>& allowed, int heads,
           std::vector<Vec>* weights_out) {
  const size_t d = q.size();
  const size_t hd = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  Vec out(d, 0.0);
  if (weights_out) weights_out->assign(heads, Vec(keys.size(), 0.0));
  Vec scores(keys.size());
  for (int h = 0; h < heads; ++h) {
    const size_t off = h * hd;
    double max_score = kLogZero;
    for (size_t j = 0; j < keys.size(); ++j) {
      if (!allowed[j]) {
        scores[j] = kLogZero;
        continue;
      }
      double s = 0.0;
      for (size_t k = 0; k < hd; ++k) s += q[off + k] * keys[j][off + k];
      scores[j] = s * scale;
      max_score = std::max(max_score, scores[j]);
    }
    if (max_score == kLogZero) continue;
    double total = 0.0;
    for (size_t j = 0; j < keys.size(); ++j) {
      scores[j] = allowed[j] ? std::exp(scores[j] - max_score) : 0.0;
      total += scores[j];
    }
    for (size_t j = 0; j < keys.size(); ++j) {
      if (!allowed[j]) continue;
      const double a = scores[j] / total;
      for (size_t k = 0; k < hd; ++k) out[off + k] += a * values[j][off + k];
      if (weights_out) (*weights_out)[h][j] = a;
    }
  }
  return out;
}

Vec OutputLogProbs(std::span<const double> x, const DecoderWeights& w) {
  Vec logits = MatVec(RmsNorm(x, w.final_norm), w.output);
  LogNormalizeInPlace(logits);
  return logits;
}

Matrix FromHeadRows(const std::vector<std::vector<Vec>>& per_row, int head) {
  Matrix m;
  for (const auto& heads : per_row) m.AppendRow(heads[head]);
  return m;
}

}  // namespace

struct Decoder::FullPass {
  std::vector<Vec> stream;  // final hidden states of the stream rows
  size_t first_label_row = 0;
  // Per layer: keys/values of every key column (kv-only rows first).
  std::vector<std::vector<Vec>> keys, values;
  std::vector<std::vector<Vec>> cross_keys, cross_values;
  // attn[layer][row][head] over key columns; cross likewise.
  std::vector<std::vector<std::vector<Vec>>> attn, cross_attn;
  AttentionMask mask{0, 0};
};

Decoder::Decoder(std::shared_ptr<const DecoderWeights> weights,
                 InterfaceConfig config, int bos_id, int eos_id)
    : weights_(std::move(weights)),
      config_(std::move(config)),
      bos_id_(bos_id),
      eos_id_(eos_id) {
  if (!weights_) throw std::invalid_argument("decoder needs weights");
  weights_->hparams.Validate();
  config_.Validate();
  CheckLabel(bos_id_);
  CheckLabel(eos_id_);
  for (int id : config_.prompt) CheckLabel(id);
}

void Decoder::CheckLabel(int id) const {
  if (id < 0 || id >= weights_->hparams.vocab_size) {
    throw std::out_of_range("decoder: token id " + std::to_string(id) +
                            " outside vocabulary of size " +
                            std::to_string(weights_->hparams.vocab_size));
  }
}

void Decoder::CheckAudio(const Matrix* audio) const {
  if (audio == nullptr) {
    if (config_.kind == InterfaceKind::kAed) {
      throw std::invalid_argument("aed decoder requires audio");
    }
    return;
  }
  if (audio->rows() > 0 &&
      audio->cols() != static_cast<size_t>(weights_->hparams.dim)) {
    throw std::invalid_argument("audio width " + std::to_string(audio->cols()) +
                                " does not match decoder dim " +
                                std::to_string(weights_->hparams.dim));
  }
}

Decoder::FullPass Decoder::Run(const Matrix* audio, std::span<const int> labels,
                               bool keep_attention) const {
  CheckAudio(audio);
  for (int id : labels) CheckLabel(id);
  const DecoderWeights& w = *weights_;
  const int heads = w.hparams.heads;
  const size_t pa = audio ? audio->rows() : 0;
  const size_t pp = config_.prompt.size();

  FullPass pass;
  // Stream rows are updated layer by layer; kv-only rows (merged audio)
  // contribute keys and values but are never updated.
  size_t kv_only = 0;
  size_t pos_offset = 0;
  const bool prefix_kind = config_.kind == InterfaceKind::kPrefix;
  if (prefix_kind) {
    for (size_t t = 0; t < pa; ++t) {
      const auto r = audio->Row(t);
      pass.stream.emplace_back(r.begin(), r.end());
    }
    pass.mask = BuildAttentionMask(config_, pa + pp, labels.size());
  } else if (config_.kind == InterfaceKind::kMerged) {
    kv_only = pa;
    pos_offset = pa;
    pass.mask = BuildAttentionMask(config_, pa, pp + labels.size());
  } else {
    pass.mask = BuildAttentionMask(config_, 0, pp + labels.size());
  }
  for (int id : config_.prompt) {
    const auto r = w.embed.Row(id);
    pass.stream.emplace_back(r.begin(), r.end());
  }
  pass.first_label_row = pass.stream.size();
  for (int id : labels) {
    const auto r = w.embed.Row(id);
    pass.stream.emplace_back(r.begin(), r.end());
  }
  const size_t n = pass.stream.size();
  const bool cross = config_.kind == InterfaceKind::kAed && pa > 0;

  for (const LayerWeights& l : w.layers) {
    std::vector<Vec> keys, values, queries;
    for (size_t t = 0; t < kv_only; ++t) {
      const Vec h = RmsNorm(audio->Row(t), l.attn_norm);
      Vec k = MatVec(h, l.wk);
      Rope(k, t, heads);
      keys.push_back(std::move(k));
      values.push_back(MatVec(h, l.wv));
    }
    for (size_t i = 0; i < n; ++i) {
      const Vec h = RmsNorm(pass.stream[i], l.attn_norm);
      Vec q = MatVec(h, l.wq);
      Vec k = MatVec(h, l.wk);
      Rope(q, pos_offset + i, heads);
      Rope(k, pos_offset + i, heads);
      queries.push_back(std::move(q));
      keys.push_back(std::move(k));
      values.push_back(MatVec(h, l.wv));
    }
    std::vector<Vec> cross_keys, cross_values;
    if (cross) {
      for (size_t t = 0; t < pa; ++t) {
        cross_keys.push_back(MatVec(audio->Row(t), l.cross_wk));
        cross_values.push_back(MatVec(audio->Row(t), l.cross_wv));
      }
    }
    std::vector<std::vector<Vec>> layer_attn, layer_cross;
    std::vector<bool> allowed(keys.size());
    const std::vector<bool> all_audio(pa, true);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < keys.size(); ++j) allowed[j] = pass.mask(i, j);
      std::vector<Vec> head_weights;
      const Vec a = Attend(queries[i], keys, values, allowed, heads,
                           keep_attention ? &head_weights : nullptr);
      AddInPlace(pass.stream[i], MatVec(a, l.wo));
      if (keep_attention) layer_attn.push_back(std::move(head_weights));
      if (cross) {
        const Vec q = MatVec(RmsNorm(pass.stream[i], l.cross_norm), l.cross_wq);
        std::vector<Vec> cross_weights;
        const Vec c = Attend(q, cross_keys, cross_values, all_audio, heads,
                             keep_attention ? &cross_weights : nullptr);
        AddInPlace(pass.stream[i], MatVec(c, l.cross_wo));
        if (keep_attention) layer_cross.push_back(std::move(cross_weights));
      }
      AddInPlace(pass.stream[i], Ffn(pass.stream[i], l));
    }
    pass.keys.push_back(std::move(keys));
    pass.values.push_back(std::move(values));
    pass.cross_keys.push_back(std::move(cross_keys));
    pass.cross_values.push_back(std::move(cross_values));
    if (keep_attention) {
      pass.attn.push_back(std::move(layer_attn));
      pass.cross_attn.push_back(std::move(layer_cross));
    }
  }
  return pass;
}

Matrix Decoder::Forward(const Matrix* audio, std::span<const int> labels) const {
  if (labels.empty() || labels.front() != bos_id_) {
    throw std::invalid_argument("decoder labels must start with BOS");
  }
  const FullPass pass = Run(audio, labels, /*keep_attention=*/false);
  Matrix out;
  for (size_t i = pass.first_label_row; i < pass.stream.size(); ++i) {
    out.AppendRow(OutputLogProbs(pass.stream[i], *weights_));
  }
  return out;
}

AttentionExport Decoder::ExportAttention(const Matrix* audio,
                                         std::span<const int> labels) const {
  if (labels.empty() || labels.front() != bos_id_) {
    throw std::invalid_argument("decoder labels must start with BOS");
  }
  FullPass pass = Run(audio, labels, /*keep_attention=*/true);
  AttentionExport ex;
  const int heads = weights_->hparams.heads;
  for (size_t layer = 0; layer < pass.attn.size(); ++layer) {
    std::vector<Matrix> self, cross;
    for (int h = 0; h < heads; ++h) {
      self.push_back(FromHeadRows(pass.attn[layer], h));
      if (!pass.cross_attn[layer].empty()) {
        cross.push_back(FromHeadRows(pass.cross_attn[layer], h));
      }
    }
    ex.self.push_back(std::move(self));
    ex.cross.push_back(std::move(cross));
  }
  ex.mask = std::move(pass.mask);
  return ex;
}

TensorArchive AttentionExport::ToArchive() const {
  TensorArchive a;
  for (size_t i = 0; i < self.size(); ++i) {
    for (size_t h = 0; h < self[i].size(); ++h) {
      a.AddMatrix("layer" + std::to_string(i) + ".head" + std::to_string(h),
                  self[i][h]);
    }
    if (i < cross.size()) {
      for (size_t h = 0; h < cross[i].size(); ++h) {
        a.AddMatrix("layer" + std::to_string(i) + ".cross.head" + std::to_string(h),
                    cross[i][h]);
      }
    }
  }
  return a;
}

double Decoder::SeqCrossEntropy(const Matrix* audio,
                                std::span<const int> labels) const {
  if (labels.size() < 2 || labels.back() != eos_id_) {
    throw std::invalid_argument("cross entropy labels must run from BOS to EOS");
  }
  const Matrix rows = Forward(audio, labels.first(labels.size() - 1));
  double ce = 0.0;
  for (size_t s = 0; s + 1 < labels.size(); ++s) ce -= rows(s, labels[s + 1]);
  return ce;
}

DecoderState Decoder::Start(const Matrix* audio) const {
  CheckAudio(audio);
  const DecoderWeights& w = *weights_;
  const int heads = w.hparams.heads;
  const size_t pa = audio ? audio->rows() : 0;
  DecoderState state;
  state.owner = weights_.get();
  state.layers.resize(w.layers.size());

  switch (config_.kind) {
    case InterfaceKind::kPrefix: {
      // The prefix block may attend bidirectionally, so it is encoded as a
      // whole and only its keys and values are kept.
      const FullPass pass = Run(audio, {}, /*keep_attention=*/false);
      for (size_t i = 0; i < w.layers.size(); ++i) {
        state.layers[i].keys = pass.keys[i];
        state.layers[i].values = pass.values[i];
      }
      state.position = pass.stream.size();
      break;
    }
    case InterfaceKind::kMerged:
      for (size_t i = 0; i < w.layers.size(); ++i) {
        const LayerWeights& l = w.layers[i];
        for (size_t t = 0; t < pa; ++t) {
          const Vec h = RmsNorm(audio->Row(t), l.attn_norm);
          Vec k = MatVec(h, l.wk);
          Rope(k, t, heads);
          state.layers[i].keys.push_back(std::move(k));
          state.layers[i].values.push_back(MatVec(h, l.wv));
        }
      }
      state.position = pa;
      for (int id : config_.prompt) Feed(state, id, /*emit=*/false);
      break;
    case InterfaceKind::kAed:
      for (size_t i = 0; i < w.layers.size(); ++i) {
        const LayerWeights& l = w.layers[i];
        for (size_t t = 0; t < pa; ++t) {
          state.layers[i].cross_keys.push_back(MatVec(audio->Row(t), l.cross_wk));
          state.layers[i].cross_values.push_back(MatVec(audio->Row(t), l.cross_wv));
        }
      }
      for (int id : config_.prompt) Feed(state, id, /*emit=*/false);
      break;
  }
  Feed(state, bos_id_, /*emit=*/true);
  return state;
}

void Decoder::Step(DecoderState& state, int label) const {
  if (state.owner != weights_.get() || state.layers.size() != weights_->layers.size() ||
      state.num_labels == 0) {
    throw std::invalid_argument("decoder state does not belong to these weights");
  }
  CheckLabel(label);
  Feed(state, label, /*emit=*/true);
}

void Decoder::Feed(DecoderState& state, int token, bool emit) const {
  const DecoderWeights& w = *weights_;
  const int heads = w.hparams.heads;
  const auto e = w.embed.Row(token);
  Vec x(e.begin(), e.end());
  for (size_t i = 0; i < w.layers.size(); ++i) {
    const LayerWeights& l = w.layers[i];
    DecoderState::LayerCache& cache = state.layers[i];
    const Vec h = RmsNorm(x, l.attn_norm);
    Vec q = MatVec(h, l.wq);
    Vec k = MatVec(h, l.wk);
    Rope(q, state.position, heads);
    Rope(k, state.position, heads);
    cache.keys.push_back(std::move(k));
    cache.values.push_back(MatVec(h, l.wv));
    const std::vector<bool> all(cache.keys.size(), true);
    AddInPlace(x, MatVec(Attend(q, cache.keys, cache.values, all, heads, nullptr), l.wo));
    if (!cache.cross_keys.empty()) {
      const Vec cq = MatVec(RmsNorm(x, l.cross_norm), l.cross_wq);
      const std::vector<bool> all_audio(cache.cross_keys.size(), true);
      AddInPlace(x, MatVec(Attend(cq, cache.cross_keys, cache.cross_values,
                                  all_audio, heads, nullptr),
                           l.cross_wo));
    }
    AddInPlace(x, Ffn(x, l));
  }
  ++state.position;
  if (emit) {
    ++state.num_labels;
    state.next_log_probs = OutputLogProbs(x, w);
  }
}

}  // namespace fusionkit::decoder
