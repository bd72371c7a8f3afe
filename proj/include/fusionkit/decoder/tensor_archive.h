// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fusionkit/core/matrix.h"

namespace fusionkit::decoder {

struct Tensor {
  std::vector<uint32_t> dims;
  std::vector<float> data;  // row-major

  size_t num_elements() const;
};

// Named f32 tensors in the FKWT container:
//   "FKWT" | version u32 = 1 | count u32 |
//   per tensor: name length u16 | name | rank u8 | dims u32[rank] | f32 data
// Tensors are written in insertion order.
class TensorArchive {
 public:
  // Throws std::invalid_argument for duplicate names or inconsistent dims.
  void Add(std::string name, Tensor tensor);
  void AddMatrix(std::string name, const Matrix& m);
  void AddVector(std::string name, const std::vector<double>& v);

  bool Contains(const std::string& name) const;
  // Throws FormatError naming the tensor if it is missing or has other dims.
  const Tensor& Get(const std::string& name) const;
  Matrix GetMatrix(const std::string& name, size_t rows, size_t cols) const;
  std::vector<double> GetVector(const std::string& name, size_t size) const;

  const std::vector<std::string>& names() const { return order_; }
  size_t size() const { return order_.size(); }

  static TensorArchive Read(std::istream& in);
  static TensorArchive Load(const std::filesystem::path& path);
  void Write(std::ostream& out) const;
  void Save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, Tensor> tensors_;
};

}  // namespace fusionkit::decoder
