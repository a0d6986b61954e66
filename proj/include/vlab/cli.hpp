#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vlab::cli {

enum ExitCode { kOk = 0, kFails = 1, kInconclusive = 2, kInputError = 3 };

// Runs one subcommand. args excludes the program name. The report goes to
// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vlab::cli
