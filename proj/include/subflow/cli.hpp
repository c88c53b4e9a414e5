#pragma once

#include <iosfwd>

namespace subflow {

/// Command-line entry point. Returns 0 on success, 2 for configuration errors,
/// 3 for numerical failures and 1 for anything else; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace subflow
