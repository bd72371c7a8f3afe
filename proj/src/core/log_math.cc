// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/core/log_math.h"

#include <algorithm>
#include <stdexcept>

#include "fusionkit/core/matrix.h"

namespace fusionkit {

double LogSumExp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("LogSumExp of empty list");
  const double max = *std::max_element(values.begin(), values.end());
  if (max == kLogZero) return kLogZero;
  if (std::isinf(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

void LogNormalizeInPlace(std::span<double> values) {
  const double norm = LogSumExp(values);
  if (norm == kLogZero) return;
  for (double& v : values) v -= norm;
}

size_t ArgMax(std::span<const double> values) {
  size_t best = 0;
  for (size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void Matrix::AppendRow(std::span<const double> row) {
  if (rows_ == 0 && cols_ == 0) cols_ = row.size();
  if (row.size() != cols_) {
    throw std::invalid_argument("AppendRow: column count mismatch");
  }
  data_.insert(data_.end(), row.begin(), row.end());
  ++rows_;
}

}  // namespace fusionkit
