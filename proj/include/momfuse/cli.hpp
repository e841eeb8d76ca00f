#pragma once

#include <iosfwd>

namespace momfuse {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitEmptyBatch = 3,
};

/// Entry point of the `momfuse` command (fuse / eval / batch / synth).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace momfuse
