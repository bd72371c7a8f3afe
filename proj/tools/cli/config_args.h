// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace fusionkit::cli {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Reads `key = value` lines. Blank lines and lines starting with '#' or ';'
// are skipped, values may be wrapped in double quotes, and keys must be
// unique. Throws std::runtime_error with the path and line number.
KeyValues ReadConfigFile(const std::filesystem::path& path);

// Replaces every `--config <path>` (or `--config=<path>`) in `args` by the
// file's entries as `--key value` pairs, placed right after the command
// name so later flags override them. args[0] is the command name.
std::vector<std::string> ExpandConfigArgs(std::vector<std::string> args);

}  // namespace fusionkit::cli
