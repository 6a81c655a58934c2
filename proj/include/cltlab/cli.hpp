#pragma once

namespace cltlab {

// Full command-line front end; returns the process exit status
// (0 ok, 1 configuration error, 2 runtime error).
int run_cli(int argc, const char* const* argv);

}  // namespace cltlab
