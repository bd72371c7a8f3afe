// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/ctc/prefix_scorer.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fusionkit/core/log_math.h"

namespace fusionkit::ctc {

PrefixScorer::PrefixScorer(std::shared_ptr<const Posteriorgram> pg, int blank,
                           int eos)
    : pg_(std::move(pg)), blank_(blank), eos_(eos) {
  if (!pg_) throw std::invalid_argument("PrefixScorer: null posteriorgram");
  probs_ = Matrix(pg_->num_frames(), pg_->vocab_size());
  for (size_t t = 0; t < probs_.rows(); ++t) {
    for (size_t v = 0; v < probs_.cols(); ++v) probs_(t, v) = std::exp((*pg_)(t, v));
  }
}

PrefixState PrefixScorer::Initial() const {
  const size_t frames = pg_->num_frames();
  PrefixState state;
  state.blank_ending.resize(frames);
  state.label_ending.assign(frames, kLogZero);
  double acc = 0.0;
  for (size_t t = 0; t < frames; ++t) {
    acc += (*pg_)(t, blank_);
    state.blank_ending[t] = acc;
  }
  state.prefix_log_prob = 0.0;
  return state;
}

// Standard CTC prefix recursion: phi(t) is the mass of paths that have
// emitted exactly g by frame t and may start the new label at t+1.
double PrefixScorer::ScoreOne(const PrefixState& state, int label,
                              std::vector<double>* label_ending) const {
  const Posteriorgram& pg = *pg_;
  const size_t frames = pg.num_frames();
  const bool repeat = label == state.last_label;

  double r_label = state.length == 0 ? pg(0, label) : kLogZero;
  double psi = r_label;
  if (label_ending) (*label_ending)[0] = r_label;
  for (size_t t = 1; t < frames; ++t) {
    const double prev_blank = state.blank_ending[t - 1];
    const double phi =
        repeat ? prev_blank : LogAdd(prev_blank, state.label_ending[t - 1]);
    const double y = pg(t, label);
    const double entry = phi == kLogZero ? kLogZero : phi + y;
    r_label = LogAdd(r_label == kLogZero ? kLogZero : r_label + y, entry);
    psi = LogAdd(psi, entry);
    if (label_ending) (*label_ending)[t] = r_label;
  }
  return psi;
}

// Below this a linear-domain sum may have lost relevant terms to underflow.
constexpr double kLinearFloor = 1e-280;

void PrefixScorer::Score(const PrefixState& state,
                         std::span<const int> candidates,
                         std::span<double> out) const {
  if (out.size() != candidates.size()) {
    throw std::invalid_argument("PrefixScorer::Score: output size mismatch");
  }
  const size_t frames = pg_->num_frames();
  // psi(g.c) = sum_t phi(t-1) y_t(c) for every c other than last(g); phi is
  // shared, so it is scaled into the linear domain once.
  std::vector<double> phi(frames);
  phi[0] = state.length == 0 ? 0.0 : kLogZero;
  for (size_t t = 1; t < frames; ++t) {
    phi[t] = LogAdd(state.blank_ending[t - 1], state.label_ending[t - 1]);
  }
  const double top = *std::max_element(phi.begin(), phi.end());
  std::vector<double> weight(frames);
  for (size_t t = 0; t < frames; ++t) {
    weight[t] = top == kLogZero ? 0.0 : std::exp(phi[t] - top);
  }
  for (size_t i = 0; i < candidates.size(); ++i) {
    const int c = candidates[i];
    if (c == blank_) {
      throw std::invalid_argument("blank is not a valid prefix candidate");
    }
    if (c == eos_) {
      out[i] = FullLogProb(state);
      continue;
    }
    if (top == kLogZero) {
      out[i] = kLogZero;
      continue;
    }
    if (c != state.last_label) {
      double sum = 0.0;
      for (size_t t = 0; t < frames; ++t) sum += weight[t] * probs_(t, c);
      if (sum >= kLinearFloor) {
        out[i] = top + std::log(sum);
        continue;
      }
    }
    out[i] = ScoreOne(state, c, nullptr);
  }
}

PrefixState PrefixScorer::Extend(const PrefixState& state, int label) const {
  if (label == blank_ || label == eos_) {
    throw std::invalid_argument("cannot extend a CTC prefix with blank/eos");
  }
  const Posteriorgram& pg = *pg_;
  const size_t frames = pg.num_frames();
  PrefixState next;
  next.label_ending.resize(frames);
  next.prefix_log_prob = ScoreOne(state, label, &next.label_ending);
  next.blank_ending.resize(frames);
  next.blank_ending[0] = kLogZero;
  for (size_t t = 1; t < frames; ++t) {
    const double prev =
        LogAdd(next.blank_ending[t - 1], next.label_ending[t - 1]);
    next.blank_ending[t] = prev == kLogZero ? kLogZero : prev + pg(t, blank_);
  }
  next.last_label = label;
  next.length = state.length + 1;
  return next;
}

double PrefixScorer::FullLogProb(const PrefixState& state) const {
  const size_t last = pg_->num_frames() - 1;
  return LogAdd(state.blank_ending[last], state.label_ending[last]);
}

}  // namespace fusionkit::ctc
