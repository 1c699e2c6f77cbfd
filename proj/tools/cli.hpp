#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nlvar::cli {

/// Runs one subcommand. args excludes the program name. Returns 0 on
/// success, 1 on domain errors (including a model that is not a certified
/// member), 2 on input, schema or usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nlvar::cli
