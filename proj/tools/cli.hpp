#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spotindex::cli {

/// Runs one command line. Returns 0 on success, 1 on domain errors and 2 on
/// usage errors. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spotindex::cli
