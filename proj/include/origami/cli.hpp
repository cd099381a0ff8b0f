#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace origami {

// Runs the command line `origami <args...>` (args excludes the program name)
// and returns the process exit code: 0 on success, 1 for internal or
// configuration errors, 2 for input errors. Failures are reported as a single
// JSON object on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace origami
