#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wirefit::cli {

// Entry point shared by the `wirefit` binary and the tests. `args` excludes
// the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wirefit::cli
