#pragma once

#include <ostream>

namespace nvb::cli {

/// Runs the command line tool. Exit codes: 0 success, 1 invalid input,
/// 2 verification failure, 3 refinement failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nvb::cli
