#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mextract {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

struct DispatchOptions {
  /// Reports default to a table when true and to JSON otherwise.
  bool interactive = false;
};

/// Runs one command line (without the program name) and returns the exit
/// code: 0 on success, 1 on validation or runtime failure, 2 on usage errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             const DispatchOptions& options = {});

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
             const DispatchOptions& options = {});

}  // namespace mextract
