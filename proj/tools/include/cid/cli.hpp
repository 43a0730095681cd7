#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cid {

/// Runs one command line (args exclude the program name). Writes the output
/// document to `out`, diagnostics to `err`, and returns the exit code:
/// 0 ok, 1 usage, 2 validation, 3 query, 4 resource.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cid
