#pragma once

#include <string_view>

namespace hyret {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Entry point shared by the binary and the tests; returns the process exit
// code (0 success, 1 any error). Errors go to stderr, results to stdout.
int cli_main(int argc, const char* const* argv);

}  // namespace hyret
