#pragma once

#include <iosfwd>

namespace uavpheno::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,  // unexpected error
  kConfigError = 2,
  kInputError = 3,
  kNumericError = 4,
};

/// Name of the environment variable holding the default config path.
inline constexpr const char* kConfigEnv = "UAVPHENO_CONFIG";

/// Parses argv and runs one subcommand. Help and diagnostics go to `out`
/// and `err`; failures print a single line and map to an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace uavpheno::cli
