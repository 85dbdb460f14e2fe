#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pals::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

/// Runs one subcommand. `args` excludes the program name. Errors end up as a
/// single "error: <kind>: <reason>" line on `err` and the matching exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pals::cli
