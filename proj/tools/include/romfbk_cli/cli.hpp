#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace romfbk::cli {

/// Runs one subcommand. args excludes the program name. Returns the process
/// exit code: 0 on success, 1 on runtime/validation failure, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace romfbk::cli
