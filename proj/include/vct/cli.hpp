#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vct {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitPartial = 1, kExitUsage = 2, kExitIo = 3 };

/// Runs one command line; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vct
