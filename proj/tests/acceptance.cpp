// Acceptance battery runner: prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.
#include <iostream>

#include "fracgs/verify/acceptance.hpp"

int main(int argc, char** argv) {
    fracgs::verify::AcceptConfig cfg;
    if (argc > 1) cfg.out_dir = argv[1];
    if (argc > 2) cfg.seed = std::strtoull(argv[2], nullptr, 10);
    return fracgs::verify::acceptance_main(cfg, std::cout);
}
