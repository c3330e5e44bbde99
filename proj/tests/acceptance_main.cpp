// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

// Runs every verification criterion at its pinned tolerance and prints one
// pass/fail line per criterion.

#include "chsteer/acceptance.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

int main(int argc, char** argv) {
    std::uint64_t seed = 20260809;
    int jobs = 4;
    int criterion = 0;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--seed" && i + 1 < argc) seed = std::strtoull(argv[++i], nullptr, 10);
        else if (arg == "--jobs" && i + 1 < argc) jobs = std::atoi(argv[++i]);
        else if (arg == "--criterion" && i + 1 < argc) criterion = std::atoi(argv[++i]);
    }
    auto results = chsteer::run_acceptance(seed, jobs, criterion);
    std::fputs(chsteer::acceptance_matrix(results).c_str(), stdout);
    return chsteer::all_pass(results) ? 0 : 1;
}
