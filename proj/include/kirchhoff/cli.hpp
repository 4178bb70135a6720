#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kirchhoff::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitSolver = 2;

/// Entry point of the `kirchhoff` command. Subcommands: constants,
/// classify, scalar, energy, solve, sweep, lambda-star, lambda-tilde,
/// curves. Returns 0 on success, 1 on invalid input, 2 when a solver does
/// not converge.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "5..12" or "4,5,8" into a list of dimensions.
std::vector<int> parse_dimension_list(const std::string& text);

}  // namespace kirchhoff::cli
