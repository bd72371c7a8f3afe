// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/config_args.h"

#include <fmt/format.h>

#include <fstream>
#include <set>
#include <stdexcept>
#include <string_view>

namespace fusionkit::cli {
namespace {

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues ReadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  KeyValues out;
  std::set<std::string> seen;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    const std::string_view s = Trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw std::runtime_error(
          fmt::format("{}:{}: expected `key = value`", path.string(), number));
    }
    std::string key(Trim(s.substr(0, eq)));
    std::string_view value = Trim(s.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) {
      throw std::runtime_error(fmt::format("{}:{}: empty key", path.string(), number));
    }
    if (!seen.insert(key).second) {
      throw std::runtime_error(
          fmt::format("{}:{}: duplicate key {}", path.string(), number, key));
    }
    out.emplace_back(std::move(key), std::string(value));
  }
  return out;
}

std::vector<std::string> ExpandConfigArgs(std::vector<std::string> args) {
  std::vector<std::string> from_files, rest;
  for (size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::runtime_error("--config needs a path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    for (auto& [key, value] : ReadConfigFile(path)) {
      from_files.push_back("--" + key);
      from_files.push_back(value);
    }
  }
  if (rest.empty()) return from_files;
  std::vector<std::string> out{rest[0]};
  out.insert(out.end(), from_files.begin(), from_files.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

}  // namespace fusionkit::cli
