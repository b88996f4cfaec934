// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Each suite is also reachable through `spinloc verify <name>`.

#include <cstdio>
#include <exception>

#include "spinloc/verify.hpp"

int main() {
    int failures = 0;
    int index = 0;
    for (const auto& name : spinloc::suite_names()) {
        ++index;
        try {
            const spinloc::SuiteResult r = spinloc::run_suite(name);
            std::printf("[%s] %2d. %-18s %s\n", r.pass ? "PASS" : "FAIL", index,
                        name.c_str(), r.details.dump().c_str());
            if (!r.pass) ++failures;
        } catch (const std::exception& e) {
            std::printf("[FAIL] %2d. %-18s exception: %s\n", index, name.c_str(), e.what());
            ++failures;
        }
        std::fflush(stdout);
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
