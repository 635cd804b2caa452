// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>

namespace mrcp {

// Entry point of the `mrcp` tool. Returns 0 on success, 2 on a usage error
// and 1 on a runtime failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mrcp
