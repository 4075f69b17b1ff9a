#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace carpetlab {

/// Runs the command-line interface on `args` (without the program name).
/// Returns 0 on success, 2 on usage errors and 1 on computation errors;
/// diagnostics are single lines on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace carpetlab
