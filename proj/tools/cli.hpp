#pragma once

#include <ostream>
#include <span>
#include <string>

namespace logitmat::lab {

// Runs one `logitmat-lab` invocation. `args` excludes the program name.
// Returns 0 on success, 1 on a runtime failure, 2 on a usage error.
int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace logitmat::lab
