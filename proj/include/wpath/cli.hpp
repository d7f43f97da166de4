#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wpath {

enum ExitCode : int {
  kExitOptimal = 0,
  kExitInfeasible = 2,
  kExitUnbounded = 3,
  kExitIterationLimit = 4,
  kExitNumericalFailure = 5,
  kExitUsage = 64,
};

/// Runs the solver front end. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wpath
