#pragma once

#include <string>
#include <vector>

namespace stc {

// Command-line entry point shared by the binary and the tests; args is
// argv without the program name. Subcommands:
//
//   simulate   run a scenario, write the trace CSV and the summary JSON
//   triggers   tabulate m1, tau' and tau_s over a state grid
//   verify     conservativeness / bound-validation / admissibility sweeps
//   compare    run several configs on one system, print stats side by side
//
// Returns 0 when every requested check passes, 1 when a run or sweep
// fails a property, 2 for usage, config and domain errors.
int dispatch(const std::vector<std::string>& args);

}  // namespace stc
