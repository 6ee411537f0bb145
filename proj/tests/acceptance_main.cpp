// Acceptance battery: runs every criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero on any failure.
#include <cstdio>

#include "scfred/acceptance.hpp"

int main() {
    auto result = scfred::acceptance::run_suite(42);
    for (const auto& c : result.criteria)
        std::printf("%s criterion %2d (%s) [%.2fs] %s\n", c.pass ? "PASS" : "FAIL", c.number,
                    c.name.c_str(), c.seconds, c.pass ? "" : c.detail.c_str());
    std::fflush(stdout);
    return result.all_pass() ? 0 : 1;
}
