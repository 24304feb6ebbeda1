// Copyright 2026 The PDBL Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "pdbl/commands.hpp"

int main(int argc, char** argv) { return pdbl::run_cli(argc, argv, std::cout, std::cerr); }
