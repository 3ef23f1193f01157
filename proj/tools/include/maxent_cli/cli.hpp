#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace maxent::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kBadInput = 2,      // parse or configuration error, bad arguments
  kOutsideHull = 3,   // a query point lies outside the node hull
  kSolverFailure = 4,
  kDomainExit = 5,    // rollout left the hull; partial trajectory written
  kBlowup = 6,        // rollout produced a non-finite state
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// Arguments without the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace maxent::cli
