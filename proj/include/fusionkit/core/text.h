// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fusionkit {

// Decodes UTF-8; malformed bytes decode to U+FFFD one byte at a time.
std::u32string DecodeUtf8(std::string_view text);
std::string EncodeUtf8(std::u32string_view text);

// White_Space code points, ASCII and Unicode alike.
bool IsUnicodeSpace(char32_t cp);

// Splits on runs of Unicode whitespace; no empty pieces.
std::vector<std::string> SplitWhitespace(std::string_view text);

}  // namespace fusionkit
