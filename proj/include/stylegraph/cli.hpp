#pragma once

#include <iosfwd>

namespace stylegraph {

// Entry point of the `stylegraph` command-line tool. Returns the process exit
// code: 0 success, 1 validation failure, 2 I/O failure, 3 internal invariant
// violation.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stylegraph
