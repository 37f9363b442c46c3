/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <iosfwd>

#include "ananke/errors.hpp"

namespace ananke {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitSpec = 2;
inline constexpr int kExitKb = 3;
inline constexpr int kExitAlert = 4;
inline constexpr int kExitLookup = 5;

int exit_code_for(ErrorCode code);

// Entry point of the `ananke` binary; output goes to the given streams.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ananke
