#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ncbc::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kNumericalFailure = 3,
};

// Entry point shared by the executable and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Worker cap from NCBC_THREADS; unset or 0 means hardware concurrency.
unsigned worker_count_from_env();

}  // namespace ncbc::cli
