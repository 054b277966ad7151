#pragma once

#include <string>
#include <vector>

namespace kilnloop::cli {

/// Exit codes: 0 success, 1 user error, 2 internal error.
inline constexpr int kOk = 0;
inline constexpr int kUserError = 1;
inline constexpr int kInternalError = 2;

/// Runs one command line (without the program name). Diagnostics go to
/// standard error.
int run(const std::vector<std::string>& args);

int main(int argc, char** argv);

}  // namespace kilnloop::cli
