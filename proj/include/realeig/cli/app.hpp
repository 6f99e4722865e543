#pragma once

#include <iosfwd>

namespace realeig {

/// Parses the command line, runs one subcommand and returns its exit code
/// (see ExitCode). Reports go to `out` unless --out names a file;
/// diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace realeig
