#pragma once

namespace lpakit {

/// Runs the command line and returns the process exit code:
/// 0 success, 2 usage or lookup error, 3 analysis not applicable,
/// 4 numerical failure.
int run_cli(int argc, char** argv);

}  // namespace lpakit
