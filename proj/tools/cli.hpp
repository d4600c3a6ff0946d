#pragma once

#include <iosfwd>

namespace apex::cli {

// Entry point behind the apex executable. Returns the process exit code:
// 0 success, 2 bad input, 1 internal invariant violation.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace apex::cli
