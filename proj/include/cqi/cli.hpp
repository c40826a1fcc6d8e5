#pragma once

#include <ostream>

namespace cqi {

/// Environment variable naming the default root for run directories.
inline constexpr const char* kOutputRootVariable = "CQI_OUTPUT_ROOT";

/// Parses `argv` and runs the selected command. Returns 0 on success, 1 on a
/// runtime failure, 2 on a usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cqi
