#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cnade::cli {

/// Runs one subcommand. args excludes the program name. Returns the exit
/// code; diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cnade::cli
