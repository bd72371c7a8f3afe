// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/decoder/adapter.h"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "fusionkit/ctc/ctc.h"

namespace fusionkit::decoder {
namespace {

Matrix Concat(const Matrix& frames, size_t factor) {
  const size_t t_in = frames.rows(), d = frames.cols();
  const size_t t_out = (t_in + factor - 1) / factor;
  Matrix out(t_out, d * factor, 0.0);
  for (size_t t = 0; t < t_in; ++t) {
    const auto src = frames.Row(t);
    std::copy(src.begin(), src.end(),
              out.Row(t / factor).begin() + (t % factor) * d);
  }
  return out;
}

Matrix Project(const Matrix& frames, const Matrix& proj) {
  if (proj.rows() != frames.cols()) {
    throw std::invalid_argument("adapter projection expects width " +
                                std::to_string(proj.rows()) + ", got " +
                                std::to_string(frames.cols()));
  }
  Matrix out(frames.rows(), proj.cols(), 0.0);
  for (size_t t = 0; t < frames.rows(); ++t) {
    for (size_t i = 0; i < frames.cols(); ++i) {
      const double x = frames(t, i);
      if (x == 0.0) continue;
      for (size_t j = 0; j < proj.cols(); ++j) out(t, j) += x * proj(i, j);
    }
  }
  return out;
}

}  // namespace

EncoderOutput ApplyAdapter(const EncoderOutput& enc, const AdapterConfig& config,
                           const Posteriorgram* pg) {
  Matrix frames;
  switch (config.downsample) {
    case Downsample::kConcat:
      if (config.factor < 1) {
        throw std::invalid_argument("adapter concat factor must be >= 1");
      }
      frames = config.factor == 1 ? enc.frames()
                                  : Concat(enc.frames(), config.factor);
      break;
    case Downsample::kCtcCompress: {
      if (pg == nullptr) {
        throw std::invalid_argument("ctc compression needs a posteriorgram");
      }
      if (pg->num_frames() != enc.num_frames()) {
        throw std::invalid_argument(
            "posteriorgram and encoder output have different frame counts");
      }
      if (!(config.threshold > 0.0)) {
        throw std::invalid_argument("ctc compression threshold must be > 0");
      }
      frames = ctc::CompressEncoder(enc, ctc::MergeIndices(*pg, config.threshold))
                   .frames();
      break;
    }
  }
  if (config.projection != nullptr) frames = Project(frames, *config.projection);
  return EncoderOutput(std::move(frames));
}

}  // namespace fusionkit::decoder
