#pragma once

namespace vaporsim {

// Entry point for the command-line driver; returns the process exit code.
// Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
int run_cli(int argc, const char* const* argv);

}  // namespace vaporsim
