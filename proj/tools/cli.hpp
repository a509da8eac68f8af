#pragma once

#include <iosfwd>

namespace ksync::cli {

enum ExitCode { kHolds = 0, kFails = 1, kInputError = 2, kResourceLimit = 3 };

// Parses argv and runs one subcommand; reports go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ksync::cli
