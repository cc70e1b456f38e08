#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nomadet::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericFailure = 3 };

/// Runs one `nomadet` invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nomadet::cli
