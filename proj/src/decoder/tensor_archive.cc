// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/decoder/tensor_archive.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "fusionkit/core/binary_io.h"
#include "fusionkit/core/errors.h"

namespace fusionkit::decoder {
namespace {

constexpr uint32_t kVersion = 1;
constexpr uint64_t kMaxElements = uint64_t{1} << 30;

std::string DimsString(const std::vector<uint32_t>& dims) {
  std::string s = "[";
  for (size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

}  // namespace

size_t Tensor::num_elements() const {
  size_t n = 1;
  for (uint32_t d : dims) n *= d;
  return n;
}

void TensorArchive::Add(std::string name, Tensor tensor) {
  if (name.empty() || name.size() > 0xFFFF) {
    throw std::invalid_argument("tensor name must have 1..65535 bytes");
  }
  if (tensor.dims.size() > 0xFF || tensor.num_elements() != tensor.data.size()) {
    throw std::invalid_argument("tensor '" + name + "': dims " +
                                DimsString(tensor.dims) + " do not match " +
                                std::to_string(tensor.data.size()) + " values");
  }
  if (tensors_.count(name)) {
    throw std::invalid_argument("duplicate tensor name '" + name + "'");
  }
  order_.push_back(name);
  tensors_.emplace(std::move(name), std::move(tensor));
}

void TensorArchive::AddMatrix(std::string name, const Matrix& m) {
  Tensor t;
  t.dims = {static_cast<uint32_t>(m.rows()), static_cast<uint32_t>(m.cols())};
  t.data.assign(m.data().begin(), m.data().end());
  Add(std::move(name), std::move(t));
}

void TensorArchive::AddVector(std::string name, const std::vector<double>& v) {
  Tensor t;
  t.dims = {static_cast<uint32_t>(v.size())};
  t.data.assign(v.begin(), v.end());
  Add(std::move(name), std::move(t));
}

bool TensorArchive::Contains(const std::string& name) const {
  return tensors_.count(name) > 0;
}

const Tensor& TensorArchive::Get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw FormatError("missing tensor '" + name + "'");
  return it->second;
}

Matrix TensorArchive::GetMatrix(const std::string& name, size_t rows,
                                size_t cols) const {
  const Tensor& t = Get(name);
  if (t.dims != std::vector<uint32_t>{static_cast<uint32_t>(rows),
                                      static_cast<uint32_t>(cols)}) {
    throw FormatError("tensor '" + name + "' has dims " + DimsString(t.dims) +
                      ", expected [" + std::to_string(rows) + "," +
                      std::to_string(cols) + "]");
  }
  Matrix m(rows, cols);
  std::copy(t.data.begin(), t.data.end(), m.data().begin());
  return m;
}

std::vector<double> TensorArchive::GetVector(const std::string& name,
                                             size_t size) const {
  const Tensor& t = Get(name);
  if (t.dims != std::vector<uint32_t>{static_cast<uint32_t>(size)}) {
    throw FormatError("tensor '" + name + "' has dims " + DimsString(t.dims) +
                      ", expected [" + std::to_string(size) + "]");
  }
  return {t.data.begin(), t.data.end()};
}

TensorArchive TensorArchive::Read(std::istream& in) {
  binary::ExpectMagic(in, "FKWT");
  const uint32_t version = binary::ReadU32(in);
  if (version != kVersion) {
    throw FormatError("unsupported format version " + std::to_string(version));
  }
  const uint32_t count = binary::ReadU32(in);
  TensorArchive archive;
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = binary::ReadU16(in);
    std::string name = binary::ReadBytes(in, name_len);
    Tensor t;
    const uint8_t rank = binary::ReadU8(in);
    uint64_t n = 1;
    for (uint8_t r = 0; r < rank; ++r) {
      t.dims.push_back(binary::ReadU32(in));
      n *= t.dims.back();
      if (n > kMaxElements) throw FormatError("tensor '" + name + "' is too large");
    }
    t.data.resize(n);
    for (float& v : t.data) v = binary::ReadF32(in);
    if (name.empty() || archive.Contains(name)) {
      throw FormatError("empty or duplicate tensor name '" + name + "'");
    }
    archive.Add(std::move(name), std::move(t));
  }
  return archive;
}

TensorArchive TensorArchive::Load(const std::filesystem::path& path) {
  auto in = binary::OpenForRead(path);
  try {
    return Read(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void TensorArchive::Write(std::ostream& out) const {
  binary::WriteBytes(out, "FKWT");
  binary::WriteU32(out, kVersion);
  binary::WriteU32(out, static_cast<uint32_t>(order_.size()));
  for (const std::string& name : order_) {
    const Tensor& t = tensors_.at(name);
    binary::WriteU16(out, static_cast<uint16_t>(name.size()));
    binary::WriteBytes(out, name);
    binary::WriteU8(out, static_cast<uint8_t>(t.dims.size()));
    for (uint32_t d : t.dims) binary::WriteU32(out, d);
    for (float v : t.data) binary::WriteF32(out, v);
  }
}

void TensorArchive::Save(const std::filesystem::path& path) const {
  auto out = binary::OpenForWrite(path);
  Write(out);
}

}  // namespace fusionkit::decoder
