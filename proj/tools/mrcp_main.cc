// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "mrcp/cli.h"

int main(int argc, char** argv) { return mrcp::run_cli(argc, argv, std::cout, std::cerr); }
