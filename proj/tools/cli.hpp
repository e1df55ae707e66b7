#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ope::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kOverlapViolation = 3,
    kMixingFailure = 4,
};

/// Parses and dispatches one command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "-1..7" or "-1,0,2".
std::vector<int> parse_int_list(const std::string& text);

} // namespace ope::cli
