// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return haarlab::cli::run(std::move(args), std::cout, std::cerr);
}
