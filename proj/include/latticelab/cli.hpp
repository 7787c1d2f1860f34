#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace latticelab::cli {

/// Exit codes: 0 ok (holds, inconclusive, verified), 1 a legitimate failing
/// verdict, 2 input or validation error, 3 internal invariant breach.
enum ExitCode : int { kOk = 0, kFails = 1, kInput = 2, kInvariant = 3 };

/// Runs one subcommand; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace latticelab::cli
