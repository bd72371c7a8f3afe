// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace fusionkit {

// mt19937_64 with distribution helpers whose output does not depend on the
// standard library implementation, so seeded fixtures reproduce everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [lo, hi], rejection-sampled.
  int64_t UniformInt(int64_t lo, int64_t hi);

  bool Bernoulli(double p) { return Uniform() < p; }

  // Derives an independent seed, e.g. one per utterance.
  static uint64_t Mix(uint64_t seed, uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace fusionkit
