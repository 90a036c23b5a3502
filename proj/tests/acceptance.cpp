// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <cstdio>
#include <iostream>

#include "oracles/brute_mic.hpp"
#include "p2pic/p2pic.hpp"

using namespace p2pic;

int main() {
    const Profile pr = profile_by_name("default");
    auto results = run_suite(pr, criteria([] { return static_cast<long double>(oracle::mic_star_parity3()); }));
    int failed = 0;
    for (const auto& c : results) {
        std::printf("[%s] criterion %2d  %-32s %zu checks  %.2f s / %.0f s%s\n", c.pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                    c.checks.size(), c.runtime_s, c.budget_s, c.note.empty() ? "" : ("  " + c.note).c_str());
        for (const auto& r : c.checks)
            if (!r.pass)
                std::printf("       failing %s [%s] lhs=%.12g rhs=%.12g margin=%.3g %s\n", r.name.c_str(), r.subject.c_str(), r.lhs,
                            r.rhs, r.margin, r.detail.c_str());
        failed += c.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
    return failed == 0 ? 0 : 1;
}
