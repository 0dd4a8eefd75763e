#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace didlkit::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationFailure = 1,
  kUsage = 2,
  kIoError = 3,
  kNotFound = 4,
};

// `args` excludes the program name. Data goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace didlkit::cli
