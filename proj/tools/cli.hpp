#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hyptrack::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kConfigError = 2, kInputError = 3, kNumericalError = 4 };

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "HYPTRACK_OUT_DIR";

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hyptrack::cli
