// Command-line driver. Subcommands: simulate, optimize, gradcheck, verify,
// sweep. Exit codes: 0 success, 1 usage error, 2 solver failure,
// 3 verification threshold failure.
#pragma once

namespace tgc {

int run_cli(int argc, const char* const* argv);

}  // namespace tgc
