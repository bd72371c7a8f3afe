// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/search/time_sync.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

#include "fusionkit/core/log_math.h"
#include "fusionkit/lm/retokenize.h"

namespace fusionkit::search {
namespace {

struct Hyp {
  std::vector<int> labels;
  double pb = kLogZero;
  double pnb = kLogZero;
  double lm_score = 0.0;  // committed raw LM log-prob
  // Shallow fusion: LM distribution after `labels`.
  std::vector<double> lm_next;
  // Delayed fusion: committed LM history and the open word.
  std::vector<int> lm_history;
  std::string pending;
  // Delayed fusion: cost of committing `pending`, filled on first use.
  std::optional<double> commit_delta;
  std::vector<int> commit_history;

  double total() const { return LogAdd(pb, pnb); }
};

// A hypothesis of the next frame before pruning. New prefixes are kept as
// (parent, label) so label vectors are only built for survivors.
struct Next {
  int source = -1;  // beam index carrying the same prefix, or -1
  int parent = -1;  // beam index of the parent prefix when source == -1
  int label = -1;
  double pb = kLogZero;
  double pnb = kLogZero;
  double lm_score = 0.0;
  double score = kLogZero;
};

enum class Fusion { kNone, kShallow, kDelayed };

class Search {
 public:
  Search(const Posteriorgram& pg, const Vocabulary& vocab, const lm::LanguageModel* lm,
         double lm_weight, Fusion fusion, const TimeSyncOptions& options,
         DecodeStats* stats)
      : pg_(pg),
        vocab_(vocab),
        lm_(lm),
        lm_weight_(lm_weight),
        fusion_(fusion),
        beam_size_(options.beam),
        stats_(stats) {
    if (fusion_ == Fusion::kDelayed) retok_.emplace(lm_->vocab());
  }

  NBestList Run();

 private:
  std::string_view Piece(int id) const {
    return vocab_.unk_id() == id ? std::string_view(vocab_.token(id))
                                 : vocab_.Surface(id);
  }
  double ScoreLmUnits(std::vector<int>& history, const std::vector<int>& units) const;
  double LmDelta(Hyp& parent, int label);
  void InitHyp(Hyp& h, const Hyp* parent, int label);
  double Finalize(const Hyp& h) const;
  bool Before(const Next& a, const Next& b) const;
  size_t LabelCount(const Next& n) const;
  int CompareLabels(const Next& a, const Next& b) const;

  const Posteriorgram& pg_;
  const Vocabulary& vocab_;
  const lm::LanguageModel* lm_;
  double lm_weight_;
  Fusion fusion_;
  int beam_size_;
  DecodeStats* stats_;
  std::optional<lm::Retokenizer> retok_;
  std::vector<Hyp> beam_;
};

double Search::ScoreLmUnits(std::vector<int>& history,
                            const std::vector<int>& units) const {
  double total = 0.0;
  for (int u : units) {
    total += lm_->LogProb(history, u);
    history.push_back(u);
  }
  return total;
}

double Search::LmDelta(Hyp& parent, int label) {
  switch (fusion_) {
    case Fusion::kNone:
      return 0.0;
    case Fusion::kShallow:
      if (stats_) ++stats_->scorer_evaluations;
      return parent.lm_next[label];
    case Fusion::kDelayed:
      if (parent.labels.empty() || !lm::StartsWord(vocab_, label)) return 0.0;
      if (!parent.commit_delta) {
        parent.commit_history = parent.lm_history;
        parent.commit_delta =
            ScoreLmUnits(parent.commit_history, retok_->Word(parent.pending));
        if (stats_) ++stats_->scorer_evaluations;
      }
      return *parent.commit_delta;
  }
  return 0.0;
}

void Search::InitHyp(Hyp& h, const Hyp* parent, int label) {
  if (fusion_ == Fusion::kShallow) {
    h.lm_next = lm_->NextLogProbs(h.labels);
  } else if (fusion_ == Fusion::kDelayed && parent != nullptr) {
    if (!parent->labels.empty() && lm::StartsWord(vocab_, label)) {
      h.lm_history = parent->commit_history;
      h.pending = std::string(Piece(label));
    } else {
      h.lm_history = parent->lm_history;
      h.pending = parent->pending + std::string(Piece(label));
    }
  }
}

double Search::Finalize(const Hyp& h) const {
  switch (fusion_) {
    case Fusion::kNone:
      return 0.0;
    case Fusion::kShallow:
      return h.lm_next[vocab_.eos_id()];
    case Fusion::kDelayed: {
      std::vector<int> history = h.lm_history;
      double delta = 0.0;
      if (!h.pending.empty()) delta = ScoreLmUnits(history, retok_->Word(h.pending));
      return delta + lm_->LogProb(history, lm_->vocab().eos_id());
    }
  }
  return 0.0;
}

size_t Search::LabelCount(const Next& n) const {
  return n.source >= 0 ? beam_[n.source].labels.size()
                       : beam_[n.parent].labels.size() + 1;
}

int Search::CompareLabels(const Next& a, const Next& b) const {
  auto at = [&](const Next& n, size_t i) {
    if (n.source >= 0) return beam_[n.source].labels[i];
    const auto& p = beam_[n.parent].labels;
    return i < p.size() ? p[i] : n.label;
  };
  const size_t len = std::min(LabelCount(a), LabelCount(b));
  for (size_t i = 0; i < len; ++i) {
    const int x = at(a, i), y = at(b, i);
    if (x != y) return x < y ? -1 : 1;
  }
  return 0;
}

bool Search::Before(const Next& a, const Next& b) const {
  if (a.score != b.score) return a.score > b.score;
  const size_t la = LabelCount(a), lb = LabelCount(b);
  if (la != lb) return la < lb;
  return CompareLabels(a, b) < 0;
}

NBestList Search::Run() {
  if (beam_size_ < 1) throw std::invalid_argument("beam must be >= 1");
  ScopedTimer timer(stats_);
  const int blank = vocab_.blank_id();
  std::vector<int> labels;
  for (int id : vocab_.EmittableLabels()) labels.push_back(id);

  beam_.assign(1, Hyp{});
  beam_[0].pb = 0.0;
  InitHyp(beam_[0], nullptr, -1);

  std::vector<Next> next;
  for (size_t t = 0; t < pg_.num_frames(); ++t) {
    const auto row = pg_.Row(t);
    next.clear();
    // Slot of each beam prefix in `next`, and of beam prefixes that extend
    // another beam prefix by one label.
    std::map<std::pair<int, int>, int> child_of;
    {
      std::map<std::vector<int>, int> index;
      for (size_t i = 0; i < beam_.size(); ++i) index[beam_[i].labels] = static_cast<int>(i);
      for (size_t i = 0; i < beam_.size(); ++i) {
        const auto& l = beam_[i].labels;
        if (l.empty()) continue;
        auto it = index.find(std::vector<int>(l.begin(), l.end() - 1));
        if (it != index.end()) child_of[{it->second, l.back()}] = static_cast<int>(i);
      }
    }
    for (size_t i = 0; i < beam_.size(); ++i) {
      Next n;
      n.source = static_cast<int>(i);
      n.lm_score = beam_[i].lm_score;
      next.push_back(n);
    }
    size_t expansions = 0;
    for (size_t i = 0; i < beam_.size(); ++i) {
      Hyp& h = beam_[i];
      const double total = h.total();
      if (total == kLogZero) continue;
      Next& self = next[i];
      self.pb = LogAdd(self.pb, total + row[blank]);
      const int last = h.labels.empty() ? -1 : h.labels.back();
      if (last >= 0 && h.pnb != kLogZero && row[last] != kLogZero) {
        self.pnb = LogAdd(self.pnb, h.pnb + row[last]);
      }
      for (int c : labels) {
        if (row[c] == kLogZero) continue;
        const double from = c == last ? h.pb : total;
        if (from == kLogZero) continue;
        ++expansions;
        const double mass = from + row[c];
        auto it = child_of.find({static_cast<int>(i), c});
        if (it != child_of.end()) {
          Next& target = next[it->second];
          target.pnb = LogAdd(target.pnb, mass);
          continue;
        }
        Next n;
        n.parent = static_cast<int>(i);
        n.label = c;
        n.pnb = mass;
        n.lm_score = h.lm_score + LmDelta(h, c);
        next.push_back(n);
      }
    }
    if (stats_) {
      stats_->peak_candidates = std::max(stats_->peak_candidates, expansions);
      stats_->scorer_evaluations += expansions;
    }

    for (Next& n : next) {
      const double ctc = LogAdd(n.pb, n.pnb);
      n.score = ctc == kLogZero ? kLogZero : ctc + lm_weight_ * n.lm_score;
    }
    std::erase_if(next, [](const Next& n) { return n.score == kLogZero; });
    const size_t keep = std::min(next.size(), static_cast<size_t>(beam_size_));
    std::partial_sort(next.begin(), next.begin() + keep, next.end(),
                      [this](const Next& a, const Next& b) { return Before(a, b); });
    next.resize(keep);

    std::vector<Hyp> survivors;
    survivors.reserve(keep);
    for (const Next& n : next) {
      Hyp h;
      if (n.source >= 0) {
        h = beam_[n.source];
      } else {
        Hyp& parent = beam_[n.parent];
        h.labels = parent.labels;
        h.labels.push_back(n.label);
        h.lm_score = n.lm_score;
        InitHyp(h, &parent, n.label);
      }
      h.pb = n.pb;
      h.pnb = n.pnb;
      survivors.push_back(std::move(h));
    }
    beam_ = std::move(survivors);
    if (stats_) {
      stats_->peak_live_hypotheses = std::max(stats_->peak_live_hypotheses, beam_.size());
    }
  }

  NBestList nbest;
  for (const Hyp& h : beam_) {
    Hypothesis out;
    out.labels = h.labels;
    out.finished = true;
    const double ctc = h.total();
    out.score_components["ctc"] = ctc;
    out.combined_score = ctc;
    if (fusion_ != Fusion::kNone) {
      const double lm = h.lm_score + Finalize(h);
      out.score_components["lm"] = lm;
      out.combined_score += lm_weight_ * lm;
    }
    nbest.push_back(std::move(out));
  }
  SortNBest(nbest);
  return nbest;
}

}  // namespace

NBestList TimeSyncBeam(const Posteriorgram& pg, const Vocabulary& vocab,
                       const lm::LanguageModel* lm, double lm_weight,
                       const TimeSyncOptions& options, DecodeStats* stats) {
  if (static_cast<int>(pg.vocab_size()) != vocab.size()) {
    throw std::invalid_argument("posteriorgram width does not match the vocabulary");
  }
  if (lm != nullptr && !(lm->vocab() == vocab)) {
    throw std::invalid_argument(
        "language model vocabulary differs from the recognition vocabulary; "
        "use delayed fusion for mismatched vocabularies");
  }
  Search search(pg, vocab, lm, lm_weight, lm ? Fusion::kShallow : Fusion::kNone,
                options, stats);
  return search.Run();
}

NBestList DelayedFusionBeam(const Posteriorgram& pg, const Vocabulary& am_vocab,
                            const lm::LanguageModel& lm, double lm_weight,
                            const TimeSyncOptions& options, DecodeStats* stats) {
  if (static_cast<int>(pg.vocab_size()) != am_vocab.size()) {
    throw std::invalid_argument("posteriorgram width does not match the vocabulary");
  }
  Search search(pg, am_vocab, &lm, lm_weight, Fusion::kDelayed, options, stats);
  return search.Run();
}

double HypothesisLmLogProb(const Vocabulary& hyp_vocab, const lm::LanguageModel& lm,
                           const std::vector<int>& labels) {
  if (lm.vocab() == hyp_vocab) return lm::SequenceLogProb(lm, labels);
  std::vector<int> units;
  const lm::Retokenizer retok(lm.vocab());
  for (const std::string& word : lm::Detokenize(hyp_vocab, labels)) {
    const auto pieces = retok.Word(word);
    units.insert(units.end(), pieces.begin(), pieces.end());
  }
  return lm::SequenceLogProb(lm, units);
}

NBestList RescoreNBest(NBestList nbest, const Vocabulary& hyp_vocab,
                       const lm::LanguageModel& lm, double lm_weight,
                       double length_reward) {
  for (Hypothesis& h : nbest) {
    const double lm_score = HypothesisLmLogProb(hyp_vocab, lm, h.labels);
    const double len = static_cast<double>(h.labels.size());
    h.score_components["rescore_lm"] = lm_score;
    h.score_components["length"] = len;
    h.combined_score += lm_weight * lm_score + length_reward * len;
  }
  std::stable_sort(nbest.begin(), nbest.end(), [](const Hypothesis& a, const Hypothesis& b) {
    return a.combined_score > b.combined_score;
  });
  return nbest;
}

}  // namespace fusionkit::search
