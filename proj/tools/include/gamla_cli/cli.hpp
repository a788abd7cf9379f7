#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gamla::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2, // usage, config, schema or contract violation
    kMissingFile = 3,
    kNumericError = 4,
};

/// Runs one command line. Errors are reported on `err` as a single line
/// "error: <category>: <message>" and mapped to an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

} // namespace gamla::cli
