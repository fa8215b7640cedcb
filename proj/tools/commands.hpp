#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace csemb::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kInputError = 3,
  kNumericFailure = 4,
  kCapExceeded = 5,
  kInvalidConfig = 6,
};

/// Runs the tool on `args` (args[0] is the program name). Results go to
/// files or `out`; log lines and errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace csemb::cli
