#pragma once

#include <ostream>

namespace fixcalc::cli {

/// Entry point of the fixcalc tool. Returns the process exit status:
/// 0 success, 1 a run or check did not succeed, 2 usage or config error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fixcalc::cli
