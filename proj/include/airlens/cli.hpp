#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "airlens/error.hpp"

namespace airlens::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kEmptyData = 3,
  kConfigError = 4,
  kInternalError = 5,
};

int exit_code_for(Errc code) noexcept;

// Runs one command line (without the program name). Human-readable progress
// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace airlens::cli
