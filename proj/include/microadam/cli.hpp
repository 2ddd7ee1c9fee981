#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace microadam::cli {

/// Entry point shared by the binary and the tests. `args` excludes the
/// program name. Returns the process exit code: 0 success, 2 configuration
/// error, 3 numeric divergence.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace microadam::cli
