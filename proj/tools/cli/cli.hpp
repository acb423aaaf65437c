#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "condensate/concentration.hpp"

namespace condensate::cli {

enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,
  kUsageError = 2,
  kVerificationFailed = 3,
};

/// Injection points for self-check tests; empty in normal runs.
struct Hooks {
  std::function<void(DistanceRecord&)> record_hook;
};

/// Runs one command line (without the program name) and returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Hooks& hooks = {});

}  // namespace condensate::cli
