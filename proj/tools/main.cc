// Copyright 2026 The FusionKit Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "cli/app.h"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return fusionkit::cli::RunCli(args, std::cout, std::cerr);
}
