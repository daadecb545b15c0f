#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace odescm::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_failed = 1,
  exit_usage = 2,
  exit_inconclusive = 3,
  exit_refused = 4,
};

/// Runs one command. `args` excludes the program name. The default seed is
/// read from ODESCM_SEED when --seed is absent.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace odescm::cli
