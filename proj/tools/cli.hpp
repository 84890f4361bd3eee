#pragma once

namespace mfsk::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kIoOrFormat = 2,
    kNumeric = 3,
};

// Entry point of the `mfsk` tool; argv[0] is the program name.
int run(int argc, char** argv);

}  // namespace mfsk::cli
