#pragma once

#include <iosfwd>

namespace aht {

// Process exit codes of the `aht` front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,       // unknown flag, missing or malformed argument
  kExitIo = 3,          // unreadable model, unwritable output
  kExitModel = 4,       // model parse or validation failure
  kExitInfeasible = 5,  // inconsistent configuration, budget exceeded
  kExitSolver = 6,      // saddle solver did not certify
};

// Subcommands: validate | divergence | simulate | enumerate | bounds | sweep.
// Results go to `out` unless --out is given; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aht
