#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "certclose/enumerate.hpp"

namespace certclose {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitEmpty = 3;

/// The closure `solve` computes. `form` is "auto", "transform" or
/// "enumerate"; auto takes the transform whenever the model and the closure
/// allow it.
Closure compute_closure(const UncertainCSP& p, ClosureKind kind, const std::string& form = "auto",
                        const EnumerateOptions& opts = {});

/// Runs the command line `args` (without the program name). Reports go to
/// `out` (or the --out file), diagnostics to `err`. Nothing is written to
/// `out` when the exit code is 2.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace certclose
