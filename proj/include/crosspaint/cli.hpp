#pragma once

#include <iosfwd>

namespace crosspaint {

// Entry point of the `crosspaint` tool. Returns the process exit code:
// nonzero on usage errors, batch-level errors and failed validation.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crosspaint
