#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spseg::cli {

enum ExitCode : int {
    kOk = 0,
    kIoError = 1,
    kUsage = 2,
    kDimensionMismatch = 3,
};

/// Entry point shared by the executable and the tests. `args[0]` is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spseg::cli
