// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <utility>

namespace fusionkit {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)), exact for -inf operands.
inline double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

// log(sum(exp(values))). Requires a non-empty span; all -inf gives -inf.
double LogSumExp(std::span<const double> values);

// Subtracts LogSumExp(values) from every entry. A row of all -inf is left
// untouched.
void LogNormalizeInPlace(std::span<double> values);

// Index of the largest entry; ties go to the lowest index.
size_t ArgMax(std::span<const double> values);

}  // namespace fusionkit
