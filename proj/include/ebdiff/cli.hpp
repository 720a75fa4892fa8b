#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ebdiff {

// Exit codes: 0 success, 1 invalid input or config, 2 runtime abort.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace ebdiff
