#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace odebc::cli {

/// Runs one subcommand. args excludes the program name.
/// Returns 0 on success, 1 on validation errors or failed checks, 2 on I/O errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace odebc::cli
