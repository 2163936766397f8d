#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covrank {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Subcommands rank-test, scree, simulate and bench. `args` excludes the
/// program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace covrank
