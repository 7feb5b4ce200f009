#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace domino::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalidArgs = 1,
  kIoError = 2,
  kNumericAbort = 3,
};

// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace domino::cli
