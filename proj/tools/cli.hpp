#pragma once

#include <string>
#include <vector>

namespace spinn::cli {

// Entry point shared by the spinn binary and the test suite.
// Exit codes: 0 success, 1 runtime abort, 2 usage/config error.
int run(const std::vector<std::string>& args);

}  // namespace spinn::cli
