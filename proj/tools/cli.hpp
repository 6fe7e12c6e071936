#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ripplekit::cli {

/// Runs one `ripplekit` command line (args[0] is the program name).
/// Returns the process exit code: 0 on success, 1 on a component error,
/// 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ripplekit::cli
