#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jitter::cli {

enum ExitCode : int
{
  exit_ok = 0,
  exit_usage = 1,
  exit_data = 2,
  exit_numerical = 3
};

//! Runs the command line `args` (args[0] is the program name). Tables and
//! messages go to `out` / `err`; CSV output goes to `--output` or to `out`.
int
run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace jitter::cli
