// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fusionkit/core/hypothesis.h"
#include "fusionkit/core/vocabulary.h"

namespace fusionkit::search {

// Finished hypotheses, best first.
using NBestList = std::vector<Hypothesis>;

// Sorts by combined score with the RanksBefore tie rule.
void SortNBest(NBestList& nbest);

// One line per hypothesis:
//   <rank>\t<combined>\t<name=value,...>\t<space-separated tokens>
// Ranks start at 1; components are listed in name order.
void WriteNBest(std::ostream& out, const NBestList& nbest, const Vocabulary& vocab);
std::string FormatScore(double value);

struct DecodeStats {
  uint64_t scorer_evaluations = 0;  // per-label score lookups, all scorers
  size_t peak_live_hypotheses = 0;  // after pruning
  size_t peak_candidates = 0;       // expansions considered in one step
  double wall_seconds = 0.0;
  double audio_seconds = 0.0;  // filled in by the caller

  double rtf() const { return audio_seconds > 0.0 ? wall_seconds / audio_seconds : 0.0; }
  // Counters add, peaks take the max.
  void Merge(const DecodeStats& other);
};

// Measures wall time into DecodeStats::wall_seconds on destruction.
class ScopedTimer {
 public:
  explicit ScopedTimer(DecodeStats* stats)
      : stats_(stats), start_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    if (stats_) {
      stats_->wall_seconds += std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - start_)
                                  .count();
    }
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  DecodeStats* stats_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace fusionkit::search
