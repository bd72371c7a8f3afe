// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

// Little-endian primitives for the binary container formats. Reads throw
// FormatError on truncation.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <string_view>

namespace fusionkit::binary {

void WriteU8(std::ostream& out, uint8_t v);
void WriteU16(std::ostream& out, uint16_t v);
void WriteU32(std::ostream& out, uint32_t v);
void WriteF32(std::ostream& out, float v);
void WriteBytes(std::ostream& out, std::string_view bytes);

uint8_t ReadU8(std::istream& in);
uint16_t ReadU16(std::istream& in);
uint32_t ReadU32(std::istream& in);
float ReadF32(std::istream& in);
std::string ReadBytes(std::istream& in, size_t n);

// Reads 4 bytes and throws FormatError unless they equal `magic`.
void ExpectMagic(std::istream& in, std::string_view magic);

std::ifstream OpenForRead(const std::filesystem::path& path,
                          bool binary = true);
std::ofstream OpenForWrite(const std::filesystem::path& path,
                           bool binary = true);

}  // namespace fusionkit::binary
