#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace irae {

// Entry point of the `irae` tool. `args` excludes the program name.
// Returns 0 on success, 1 on a runtime or verification failure, and the
// argument parser's code (usually 105 or 106) on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace irae
