#include <cstdio>

#include "modeflow/acceptance.hpp"

int main()
{
    using namespace modeflow::acceptance;
    const auto suite = run_suite([](const CriterionResult& c) {
        std::printf("[%s] %2d %s: %s (%.2f s of %.0f s)\n", c.passed() ? "PASS" : "FAIL", c.id, c.title.c_str(),
                    c.measured.dump().c_str(), c.seconds, c.budget_seconds);
        std::fflush(stdout);
    });
    std::printf("%s: %zu criteria, digest %s, %.1f s\n", suite.all_passed() ? "ALL PASS" : "FAILURES", suite.criteria.size(),
                suite.digest.c_str(), suite.seconds);
    return suite.all_passed() ? 0 : 1;
}
