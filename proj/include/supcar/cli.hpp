#pragma once

#include <iosfwd>

namespace supcar {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_divergent = 3 };

// Entry point of supcar-lab; normal output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace supcar
