// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/core/posteriorgram.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "fusionkit/core/binary_io.h"
#include "fusionkit/core/errors.h"
#include "fusionkit/core/log_math.h"

namespace fusionkit {
namespace {

constexpr uint32_t kFormatVersion = 1;

Matrix ReadF32Matrix(std::istream& in, uint32_t rows, uint32_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = binary::ReadF32(in);
  return m;
}

void WriteF32Matrix(std::ostream& out, const Matrix& m) {
  for (double v : m.data()) binary::WriteF32(out, static_cast<float>(v));
}

void CheckVersion(std::istream& in) {
  const uint32_t version = binary::ReadU32(in);
  if (version != kFormatVersion) {
    throw FormatError("unsupported format version " + std::to_string(version));
  }
}

}  // namespace

void ValidateLogProbRows(const Matrix& log_probs, double tolerance) {
  for (size_t t = 0; t < log_probs.rows(); ++t) {
    const double norm = LogSumExp(log_probs.Row(t));
    if (!(std::abs(norm) <= tolerance)) {
      throw ValidationError("row " + std::to_string(t) +
                            " is not normalized (log-sum-exp " +
                            std::to_string(norm) + ")");
    }
  }
}

Posteriorgram::Posteriorgram(Matrix log_probs, double frame_duration_ms)
    : log_probs_(std::move(log_probs)), frame_duration_ms_(frame_duration_ms) {
  if (log_probs_.rows() == 0 || log_probs_.cols() == 0) {
    throw ValidationError("posteriorgram needs at least one frame and label");
  }
  if (!(frame_duration_ms_ > 0.0)) {
    throw ValidationError("frame duration must be positive");
  }
  ValidateLogProbRows(log_probs_);
}

Posteriorgram ReadPosteriorgram(std::istream& in) {
  binary::ExpectMagic(in, "FKPG");
  CheckVersion(in);
  const uint32_t frames = binary::ReadU32(in);
  const uint32_t labels = binary::ReadU32(in);
  const uint32_t frame_us = binary::ReadU32(in);
  Matrix m = ReadF32Matrix(in, frames, labels);
  return Posteriorgram(std::move(m), frame_us / 1000.0);
}

Posteriorgram ReadPosteriorgram(const std::filesystem::path& path) {
  auto in = binary::OpenForRead(path);
  try {
    return ReadPosteriorgram(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void WritePosteriorgram(const Posteriorgram& pg, std::ostream& out) {
  binary::WriteBytes(out, "FKPG");
  binary::WriteU32(out, kFormatVersion);
  binary::WriteU32(out, static_cast<uint32_t>(pg.num_frames()));
  binary::WriteU32(out, static_cast<uint32_t>(pg.vocab_size()));
  binary::WriteU32(out,
                   static_cast<uint32_t>(std::lround(pg.frame_duration_ms() * 1000.0)));
  WriteF32Matrix(out, pg.log_probs());
}

void WritePosteriorgram(const Posteriorgram& pg,
                        const std::filesystem::path& path) {
  auto out = binary::OpenForWrite(path);
  WritePosteriorgram(pg, out);
}

EncoderOutput::EncoderOutput(Matrix frames) : frames_(std::move(frames)) {
  if (frames_.rows() == 0 || frames_.cols() == 0) {
    throw ValidationError("encoder output needs T >= 1 and D >= 1");
  }
}

EncoderOutput ReadEncoderOutput(std::istream& in) {
  binary::ExpectMagic(in, "FKEO");
  CheckVersion(in);
  const uint32_t frames = binary::ReadU32(in);
  const uint32_t dim = binary::ReadU32(in);
  return EncoderOutput(ReadF32Matrix(in, frames, dim));
}

EncoderOutput ReadEncoderOutput(const std::filesystem::path& path) {
  auto in = binary::OpenForRead(path);
  try {
    return ReadEncoderOutput(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void WriteEncoderOutput(const EncoderOutput& enc, std::ostream& out) {
  binary::WriteBytes(out, "FKEO");
  binary::WriteU32(out, kFormatVersion);
  binary::WriteU32(out, static_cast<uint32_t>(enc.num_frames()));
  binary::WriteU32(out, static_cast<uint32_t>(enc.dim()));
  WriteF32Matrix(out, enc.frames());
}

void WriteEncoderOutput(const EncoderOutput& enc,
                        const std::filesystem::path& path) {
  auto out = binary::OpenForWrite(path);
  WriteEncoderOutput(enc, out);
}

}  // namespace fusionkit
