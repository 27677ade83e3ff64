#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nftgraph::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kTimeout = 3 };

/// Runs one subcommand; args exclude the program name. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// Shortest decimal with at most nine significant digits.
double round9(double v);

}  // namespace nftgraph::cli
