#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace d2d::cli {

/// Runs the command line `args` (without the program name).
/// Returns 0 on success, 1 on usage/config errors, 2 for an infeasible allocation, 3 on numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace d2d::cli
