#pragma once

#include <iosfwd>

namespace ppgd::cli {

/// Exit codes of the ppgd binary.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCertification = 1;
inline constexpr int kExitUsage = 2;

/// Parses argv, runs one subcommand (sample, fit, predict, simulate, verify)
/// and returns its exit code. Results go to `out` unless --out names a file;
/// diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ppgd::cli
