#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qnet {

// Entry point of the qnetsim tool. `args` excludes the program name.
// Returns 0 on success, 1 on usage, parse or validation errors, 2 when an
// experiment fails to run or its outputs cannot be written.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace qnet
