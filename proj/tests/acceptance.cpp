// Acceptance binary: runs every check with the default configuration and prints
// one PASS/FAIL line per check. Exit status is nonzero if any check fails.

#include <iostream>

#include "sqzlab/acceptance.hpp"

int main() {
    const sqz::ScenarioConfig config;
    const auto results = sqz::run_acceptance(config, sqz::Tolerances{}, {}, [](const sqz::CheckResult& r) {
        std::cout << sqz::format_check(r) << std::endl;
    });
    int failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    std::cout << (failed == 0 ? "acceptance: all " : "acceptance: ") << (failed == 0 ? results.size() : failed)
              << (failed == 0 ? " checks passed" : " checks failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
