// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>

#include "fusionkit/core/matrix.h"

namespace fusionkit {

inline constexpr double kDefaultFrameDurationMs = 60.0;
inline constexpr double kRowNormTolerance = 1e-6;

// Checks that every row of a log-probability matrix log-sum-exps to 0.
// Throws ValidationError naming the first offending row.
void ValidateLogProbRows(const Matrix& log_probs,
                         double tolerance = kRowNormTolerance);

// T x V frame-wise CTC log-posteriors. Immutable after construction.
class Posteriorgram {
 public:
  Posteriorgram(Matrix log_probs,
                double frame_duration_ms = kDefaultFrameDurationMs);

  size_t num_frames() const { return log_probs_.rows(); }
  size_t vocab_size() const { return log_probs_.cols(); }
  double operator()(size_t t, size_t v) const { return log_probs_(t, v); }
  std::span<const double> Row(size_t t) const { return log_probs_.Row(t); }
  const Matrix& log_probs() const { return log_probs_; }
  double frame_duration_ms() const { return frame_duration_ms_; }
  double duration_seconds() const {
    return static_cast<double>(num_frames()) * frame_duration_ms_ / 1000.0;
  }

 private:
  Matrix log_probs_;
  double frame_duration_ms_;
};

// Binary layout, little-endian:
//   "FKPG" | u32 version=1 | u32 T | u32 V | u32 frame_duration_us |
//   T*V f32 log-probs, row-major.
Posteriorgram ReadPosteriorgram(std::istream& in);
Posteriorgram ReadPosteriorgram(const std::filesystem::path& path);
void WritePosteriorgram(const Posteriorgram& pg, std::ostream& out);
void WritePosteriorgram(const Posteriorgram& pg,
                        const std::filesystem::path& path);

// T x D encoder frames.
class EncoderOutput {
 public:
  explicit EncoderOutput(Matrix frames);

  size_t num_frames() const { return frames_.rows(); }
  size_t dim() const { return frames_.cols(); }
  const Matrix& frames() const { return frames_; }

 private:
  Matrix frames_;
};

// "FKEO" | u32 version=1 | u32 T | u32 D | T*D f32.
EncoderOutput ReadEncoderOutput(std::istream& in);
EncoderOutput ReadEncoderOutput(const std::filesystem::path& path);
void WriteEncoderOutput(const EncoderOutput& enc, std::ostream& out);
void WriteEncoderOutput(const EncoderOutput& enc,
                        const std::filesystem::path& path);

}  // namespace fusionkit
