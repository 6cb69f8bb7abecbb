#pragma once

#include <ostream>

namespace oligoshare::cli {

// Full command-line front end. Parses argv, runs the requested subcommand,
// writes results to `out` and diagnostics to `err`. Returns the process exit
// code: 0 on success, 1 when the inputs describe an infeasible or invalid
// economic instance, 2 on usage errors (bad flags, malformed files).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace oligoshare::cli
