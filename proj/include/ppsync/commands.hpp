#pragma once

#include <ostream>

namespace ppsync {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitDiverged = 3,
  kExitIo = 4,
};

/// Entry point for the ppsync command line: run, compare, check,
/// phase-plane, dump-scenario.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ppsync
