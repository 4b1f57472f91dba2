#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace teleop {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 2,
  kExitConfig = 3,
  kExitTask = 4,
  kExitEnvironment = 5,
};

/// Entry point of the `teleop` tool; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace teleop
