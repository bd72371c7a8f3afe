// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/core/rng.h"

#include <limits>
#include <stdexcept>

namespace fusionkit {

int64_t Rng::UniformInt(int64_t lo, int64_t hi) {
  if (hi < lo) throw std::invalid_argument("UniformInt: empty range");
  const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<int64_t>(engine_());
  const uint64_t limit = std::numeric_limits<uint64_t>::max() -
                         std::numeric_limits<uint64_t>::max() % span;
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return lo + static_cast<int64_t>(x % span);
}

uint64_t Rng::Mix(uint64_t seed, uint64_t stream) {
  // splitmix64 finalizer
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace fusionkit
