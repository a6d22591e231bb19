#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace metro {

// Exit codes of run_cli.
enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,
    kExitUsage = 2,
    kExitConfig = 3,
    kExitIo = 4,
    kExitInfeasible = 5,
    kExitRuntime = 6,
};

// args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metro
