// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fusionkit/core/binary_io.h"

#include <array>
#include <bit>
#include <istream>
#include <ostream>

#include "fusionkit/core/errors.h"

namespace fusionkit::binary {
namespace {

template <typename T>
void WriteLe(std::ostream& out, T v) {
  std::array<char, sizeof(T)> buf;
  for (size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  }
  out.write(buf.data(), buf.size());
}

template <typename T>
T ReadLe(std::istream& in) {
  std::array<unsigned char, sizeof(T)> buf;
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw FormatError("truncated payload");
  }
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(buf[i]) << (8 * i);
  }
  return v;
}

}  // namespace

void WriteU8(std::ostream& out, uint8_t v) { WriteLe(out, v); }
void WriteU16(std::ostream& out, uint16_t v) { WriteLe(out, v); }
void WriteU32(std::ostream& out, uint32_t v) { WriteLe(out, v); }
void WriteF32(std::ostream& out, float v) {
  WriteLe(out, std::bit_cast<uint32_t>(v));
}
void WriteBytes(std::ostream& out, std::string_view bytes) {
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

uint8_t ReadU8(std::istream& in) { return ReadLe<uint8_t>(in); }
uint16_t ReadU16(std::istream& in) { return ReadLe<uint16_t>(in); }
uint32_t ReadU32(std::istream& in) { return ReadLe<uint32_t>(in); }
float ReadF32(std::istream& in) {
  return std::bit_cast<float>(ReadLe<uint32_t>(in));
}

std::string ReadBytes(std::istream& in, size_t n) {
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (in.gcount() != static_cast<std::streamsize>(n)) {
    throw FormatError("truncated payload");
  }
  return s;
}

void ExpectMagic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) ||
      got != magic) {
    throw FormatError("bad magic: expected \"" + std::string(magic) + "\"");
  }
}

std::ifstream OpenForRead(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream OpenForWrite(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc
                                 : std::ios::out | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace fusionkit::binary
