// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/search/label_sync.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "fusionkit/core/log_math.h"

namespace fusionkit::search {
namespace {

struct Node {
  std::vector<int> labels;
  std::vector<StatePtr> states;  // one per active scorer
  std::vector<double> components;
  double combined = 0.0;
  bool finished = false;

  double Ranking(bool length_norm) const {
    const size_t steps = labels.size() + (finished ? 1 : 0);
    if (!length_norm || steps == 0) return combined;
    return combined / static_cast<double>(steps);
  }
};

struct Candidate {
  size_t parent;
  int label;  // -1: carried finished hypothesis
  std::vector<int> labels;
  std::vector<double> components;
  double combined;
  bool finished;
  double ranking;
};

std::vector<size_t> ActiveScorers(const ScorerList& scorers,
                                  const ScorerWeights& weights) {
  std::vector<size_t> idx;
  for (size_t i = 0; i < scorers.size(); ++i) {
    if (weights.Weight(scorers[i]->name()) != 0.0) idx.push_back(i);
  }
  return idx;
}

Hypothesis ToHypothesis(const Node& n, const ScorerList& scorers,
                        const std::vector<size_t>& active) {
  Hypothesis h;
  h.labels = n.labels;
  for (size_t k = 0; k < active.size(); ++k) {
    h.score_components[scorers[active[k]]->name()] = n.components[k];
  }
  h.combined_score = n.combined;
  h.finished = n.finished;
  return h;
}

}  // namespace

void ValidateScorers(const ScorerList& scorers, const ScorerWeights& weights) {
  if (scorers.empty()) throw std::invalid_argument("no scorers given");
  std::set<std::string> names;
  for (const auto& s : scorers) {
    if (!names.insert(s->name()).second) {
      throw std::invalid_argument("duplicate scorer name '" + s->name() + "'");
    }
  }
  for (const auto& [name, w] : weights.weights) {
    if (!names.count(name)) {
      throw std::invalid_argument("weight given for unknown scorer '" + name + "'");
    }
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("weight for '" + name + "' must be finite and >= 0");
    }
  }
  weights.Validate();
}

size_t MaxLabels(const ScorerWeights& weights, size_t num_frames) {
  return static_cast<size_t>(std::floor(weights.max_len_factor *
                                        static_cast<double>(num_frames)));
}

std::vector<int> CandidateLabels(const ScorerList& scorers,
                                 const ScorerWeights& weights,
                                 const Vocabulary& vocab) {
  std::vector<int> labels = vocab.EmittableLabels();
  for (size_t i : ActiveScorers(scorers, weights)) {
    const auto supported = scorers[i]->SupportedLabels();
    if (!supported) continue;
    std::vector<int> kept;
    std::set_intersection(labels.begin(), labels.end(), supported->begin(),
                          supported->end(), std::back_inserter(kept));
    labels = std::move(kept);
  }
  return labels;
}

NBestList LabelSyncBeam(const ScorerList& scorers, const ScorerWeights& weights,
                        const Vocabulary& vocab, const LabelSyncOptions& options,
                        DecodeStats* stats) {
  ValidateScorers(scorers, weights);
  if (options.beam < 1) throw std::invalid_argument("beam must be >= 1");
  ScopedTimer timer(stats);
  const std::vector<size_t> active = ActiveScorers(scorers, weights);
  std::vector<double> w;
  for (size_t i : active) w.push_back(weights.Weight(scorers[i]->name()));
  const std::vector<int> allowed = CandidateLabels(scorers, weights, vocab);
  const int eos = vocab.eos_id();
  const bool norm = weights.length_norm;

  std::vector<Node> beam(1);
  for (size_t i : active) beam[0].states.push_back(scorers[i]->Initial());
  beam[0].components.assign(active.size(), 0.0);

  std::vector<int> labels_buf;
  std::vector<double> out;
  while (!beam.empty() && !beam.front().finished) {
    std::vector<Candidate> cands;
    size_t expansions = 0;
    for (size_t p = 0; p < beam.size(); ++p) {
      const Node& node = beam[p];
      if (node.finished) {
        cands.push_back({p, -1, node.labels, node.components, node.combined, true,
                         node.Ranking(norm)});
        continue;
      }
      labels_buf.clear();
      if (node.labels.size() < options.max_len) labels_buf = allowed;
      labels_buf.push_back(eos);
      std::vector<double> sums(labels_buf.size(), node.combined);
      std::vector<std::vector<double>> comps(labels_buf.size(), node.components);
      for (size_t k = 0; k < active.size(); ++k) {
        out.assign(labels_buf.size(), 0.0);
        scorers[active[k]]->Score(*node.states[k], labels_buf, out);
        for (size_t c = 0; c < labels_buf.size(); ++c) {
          comps[c][k] += out[c];
          sums[c] += w[k] * out[c];
        }
        if (stats) stats->scorer_evaluations += labels_buf.size();
      }
      expansions += labels_buf.size();
      for (size_t c = 0; c < labels_buf.size(); ++c) {
        if (std::isnan(sums[c]) || sums[c] == kLogZero) continue;
        Candidate cand{p, labels_buf[c], node.labels, std::move(comps[c]), sums[c],
                       labels_buf[c] == eos, 0.0};
        if (!cand.finished) cand.labels.push_back(cand.label);
        const size_t steps = cand.labels.size() + (cand.finished ? 1 : 0);
        cand.ranking = norm ? cand.combined / static_cast<double>(steps) : cand.combined;
        cands.push_back(std::move(cand));
      }
    }
    if (stats) stats->peak_candidates = std::max(stats->peak_candidates, expansions);

    auto before = [](const Candidate& a, const Candidate& b) {
      if (a.ranking != b.ranking) return a.ranking > b.ranking;
      if (a.labels.size() != b.labels.size()) return a.labels.size() < b.labels.size();
      if (a.labels != b.labels) return a.labels < b.labels;
      return !a.finished && b.finished;
    };
    const size_t keep = std::min(cands.size(), static_cast<size_t>(options.beam));
    std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(), before);
    cands.resize(keep);

    std::vector<Node> next;
    next.reserve(keep);
    for (Candidate& c : cands) {
      const Node& parent = beam[c.parent];
      Node n;
      n.labels = std::move(c.labels);
      n.components = std::move(c.components);
      n.combined = c.combined;
      n.finished = c.finished;
      if (!n.finished) {
        for (size_t k = 0; k < active.size(); ++k) {
          n.states.push_back(scorers[active[k]]->Advance(*parent.states[k], c.label));
        }
      }
      next.push_back(std::move(n));
    }
    beam = std::move(next);
    if (stats) stats->peak_live_hypotheses = std::max(stats->peak_live_hypotheses, beam.size());
  }

  NBestList nbest;
  for (const Node& n : beam) {
    if (n.finished) nbest.push_back(ToHypothesis(n, scorers, active));
  }
  SortNBest(nbest);
  return nbest;
}

NBestList ExhaustiveDecode(const ScorerList& scorers, const ScorerWeights& weights,
                           const Vocabulary& vocab, size_t max_len) {
  ValidateScorers(scorers, weights);
  const std::vector<size_t> active = ActiveScorers(scorers, weights);
  const std::vector<int> allowed = CandidateLabels(scorers, weights, vocab);
  double count = 0.0, layer = 1.0;
  for (size_t l = 0; l <= max_len; ++l) {
    count += layer;
    layer *= static_cast<double>(allowed.size());
  }
  if (count > kExhaustiveBudget) {
    throw std::invalid_argument("exhaustive decode would score " +
                                std::to_string(static_cast<long long>(count)) +
                                " sequences, above the budget of 1e6");
  }
  NBestList nbest;
  std::vector<size_t> digits;
  std::vector<int> seq;
  for (size_t len = 0; len <= max_len; ++len) {
    if (len > 0 && allowed.empty()) break;
    digits.assign(len, 0);
    while (true) {
      seq.resize(len);
      for (size_t i = 0; i < len; ++i) seq[i] = allowed[digits[i]];
      Hypothesis h;
      h.labels = seq;
      h.finished = true;
      for (size_t i : active) {
        const double s = scorers[i]->SequenceScore(seq);
        h.score_components[scorers[i]->name()] = s;
        h.combined_score += weights.Weight(scorers[i]->name()) * s;
      }
      if (std::isfinite(h.combined_score)) nbest.push_back(std::move(h));
      // Odometer increment, last position fastest.
      size_t pos = len;
      while (pos > 0 && ++digits[pos - 1] == allowed.size()) digits[--pos] = 0;
      if (pos == 0) break;
    }
  }
  SortNBest(nbest);
  return nbest;
}

}  // namespace fusionkit::search
