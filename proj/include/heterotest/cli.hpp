#pragma once

// Single multiplexed command-line entry point.

#include <iosfwd>
#include <string>
#include <vector>

namespace heterotest::cli {

enum ExitCode : int {
  kPassed = 0,
  kFailed = 1,
  kError = 2,
  kUsage = 64,
  kInternal = 70,
};

/// `args` excludes the program name. Human-readable summaries go to `out`,
/// diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace heterotest::cli
