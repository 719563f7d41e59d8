#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hypbound::cli {

// Exit codes of the hypbound tool.
constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kCertificateFailure = 2;

// Runs one subcommand. args excludes the program name. Reports go to the
// --json path when given and to `out` otherwise; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hypbound::cli
