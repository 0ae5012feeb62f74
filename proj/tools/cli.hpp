#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace twostage::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitCapExceeded = 3;

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out` unless --out is given; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace twostage::cli
