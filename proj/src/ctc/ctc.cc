// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/ctc/ctc.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fusionkit/core/log_math.h"

namespace fusionkit::ctc {

std::vector<int> Collapse(std::span<const int> frame_labels, int blank) {
  std::vector<int> out;
  int prev = -1;
  for (int label : frame_labels) {
    if (label != prev && label != blank) out.push_back(label);
    prev = label;
  }
  return out;
}

double ForwardLogProb(const Posteriorgram& pg, std::span<const int> target,
                      int blank) {
  const size_t frames = pg.num_frames();
  // Extended sequence: blank, a1, blank, a2, ..., aS, blank.
  const size_t ext = 2 * target.size() + 1;
  auto label_at = [&](size_t s) {
    return s % 2 == 0 ? blank : target[s / 2];
  };
  for (int label : target) {
    if (label == blank) {
      throw std::invalid_argument("CTC target must not contain blank");
    }
  }

  std::vector<double> alpha(ext, kLogZero), next(ext, kLogZero);
  alpha[0] = pg(0, blank);
  if (ext > 1) alpha[1] = pg(0, label_at(1));
  for (size_t t = 1; t < frames; ++t) {
    for (size_t s = 0; s < ext; ++s) {
      double acc = alpha[s];
      if (s >= 1) acc = LogAdd(acc, alpha[s - 1]);
      if (s >= 2 && s % 2 == 1 && label_at(s) != label_at(s - 2)) {
        acc = LogAdd(acc, alpha[s - 2]);
      }
      next[s] = acc == kLogZero ? kLogZero : acc + pg(t, label_at(s));
    }
    std::swap(alpha, next);
  }
  double total = alpha[ext - 1];
  if (ext > 1) total = LogAdd(total, alpha[ext - 2]);
  return total;
}

std::vector<int> GreedyDecode(const Posteriorgram& pg, int blank) {
  std::vector<int> best(pg.num_frames());
  for (size_t t = 0; t < pg.num_frames(); ++t) {
    best[t] = static_cast<int>(ArgMax(pg.Row(t)));
  }
  return Collapse(best, blank);
}

MergeIndexMap MergeIndices(const Posteriorgram& pg, double threshold) {
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("merge threshold must be positive");
  }
  MergeIndexMap map;
  map.threshold = threshold;
  map.indices.resize(pg.num_frames());
  const double log_threshold = std::log(threshold);
  size_t prev_label = 0;
  bool prev_confident = false;
  for (size_t t = 0; t < pg.num_frames(); ++t) {
    const size_t label = ArgMax(pg.Row(t));
    const bool confident = pg(t, label) >= log_threshold;
    if (t == 0) {
      map.indices[t] = 1;
    } else {
      const bool merge = label == prev_label && confident && prev_confident;
      map.indices[t] = map.indices[t - 1] + (merge ? 0 : 1);
    }
    prev_label = label;
    prev_confident = confident;
  }
  return map;
}

MergeIndexMap IdentityMergeMap(size_t num_frames) {
  MergeIndexMap map;
  map.indices.resize(num_frames);
  std::iota(map.indices.begin(), map.indices.end(), 1);
  return map;
}

namespace {

void CheckMap(const MergeIndexMap& map, size_t frames) {
  if (map.num_frames() != frames) {
    throw std::invalid_argument("merge map covers " +
                                std::to_string(map.num_frames()) +
                                " frames, input has " + std::to_string(frames));
  }
}

}  // namespace

EncoderOutput CompressEncoder(const EncoderOutput& enc,
                              const MergeIndexMap& map) {
  CheckMap(map, enc.num_frames());
  Matrix out(map.num_groups(), enc.dim());
  std::vector<int> counts(map.num_groups(), 0);
  for (size_t t = 0; t < enc.num_frames(); ++t) {
    const int g = map.indices[t] - 1;
    auto dst = out.Row(g);
    auto src = enc.frames().Row(t);
    for (size_t d = 0; d < dst.size(); ++d) dst[d] += src[d];
    ++counts[g];
  }
  for (int g = 0; g < map.num_groups(); ++g) {
    for (double& v : out.Row(g)) v /= counts[g];
  }
  return EncoderOutput(std::move(out));
}

Posteriorgram CompressPosteriors(const Posteriorgram& pg,
                                 const MergeIndexMap& map) {
  CheckMap(map, pg.num_frames());
  Matrix out(map.num_groups(), pg.vocab_size(), kLogZero);
  std::vector<int> counts(map.num_groups(), 0);
  for (size_t t = 0; t < pg.num_frames(); ++t) {
    const int g = map.indices[t] - 1;
    auto dst = out.Row(g);
    auto src = pg.Row(t);
    for (size_t v = 0; v < dst.size(); ++v) dst[v] = std::max(dst[v], src[v]);
    ++counts[g];
  }
  for (int g = 0; g < map.num_groups(); ++g) {
    if (counts[g] > 1) LogNormalizeInPlace(out.Row(g));
  }
  return Posteriorgram(std::move(out), pg.frame_duration_ms());
}

std::vector<int> TopKLabels(const Posteriorgram& pg, int k, int blank,
                            bool keep_blank) {
  const int vocab = static_cast<int>(pg.vocab_size());
  if (k < 1 || k > vocab) {
    throw std::out_of_range("top-k: k=" + std::to_string(k) +
                            " outside [1, " + std::to_string(vocab) + "]");
  }
  std::vector<double> max_over_time(vocab, kLogZero);
  for (size_t t = 0; t < pg.num_frames(); ++t) {
    auto row = pg.Row(t);
    for (int v = 0; v < vocab; ++v) {
      max_over_time[v] = std::max(max_over_time[v], row[v]);
    }
  }
  std::vector<int> order;
  for (int v = 0; v < vocab; ++v) {
    if (!(keep_blank && v == blank)) order.push_back(v);
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return max_over_time[a] > max_over_time[b];
  });
  const int slots = keep_blank ? k - 1 : k;
  std::vector<int> kept(order.begin(), order.begin() + slots);
  if (keep_blank) kept.push_back(blank);
  std::sort(kept.begin(), kept.end());
  return kept;
}

Posteriorgram TopKPrune(const Posteriorgram& pg, int k, int blank,
                        bool keep_blank) {
  const std::vector<int> kept = TopKLabels(pg, k, blank, keep_blank);
  if (k == static_cast<int>(pg.vocab_size())) return pg;
  Matrix out(pg.num_frames(), pg.vocab_size(), kLogZero);
  std::vector<double> kept_values(kept.size());
  for (size_t t = 0; t < pg.num_frames(); ++t) {
    for (size_t i = 0; i < kept.size(); ++i) kept_values[i] = pg(t, kept[i]);
    double norm = LogSumExp(kept_values);
    if (norm == kLogZero) {
      std::fill(kept_values.begin(), kept_values.end(), 0.0);
      norm = std::log(static_cast<double>(kept.size()));
    }
    for (size_t i = 0; i < kept.size(); ++i) {
      out(t, kept[i]) = kept_values[i] - norm;
    }
  }
  return Posteriorgram(std::move(out), pg.frame_duration_ms());
}

}  // namespace fusionkit::ctc
