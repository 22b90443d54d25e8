// Acceptance runner: one PASS/FAIL line per criterion 1-10; exit status 0 iff all pass.
// A criterion also fails when it exceeds its runtime budget.

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "fracstorm/validation.hpp"

namespace {

// Wall-time budget per criterion, in seconds.
constexpr std::array<double, 10> kBudget = {1, 5, 30, 60, 60, 10, 600, 1200, 300, 1};

}  // namespace

int main(int argc, char** argv) {
    std::uint64_t seed = 42;
    int first = 1, last = 10;
    for (int a = 1; a < argc; ++a) {
        const std::string arg = argv[a];
        if (arg.rfind("--seed=", 0) == 0) {
            seed = std::stoull(arg.substr(7));
        } else if (arg.rfind("--only=", 0) == 0) {
            first = last = std::stoi(arg.substr(7));
        } else {
            std::fprintf(stderr, "usage: %s [--seed=S] [--only=K]\n", argv[0]);
            return 2;
        }
    }
    int failed = 0;
    for (int k = first; k <= last; ++k) {
        const auto start = std::chrono::steady_clock::now();
        const fracstorm::CheckResult r = fracstorm::acceptance_criterion(k, seed);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const double budget = kBudget[static_cast<std::size_t>(k - 1)];
        const bool pass = r.pass && secs <= budget;
        std::printf("%s criterion %2d: %s | measured: %s | tolerance: %s | runtime %.1f s (budget %g s)\n",
                    pass ? "PASS" : "FAIL", k, r.title.c_str(), r.measured.c_str(), r.tolerance.c_str(), secs, budget);
        std::fflush(stdout);
        if (!pass) ++failed;
    }
    std::printf("%d/%d criteria passed\n", last - first + 1 - failed, last - first + 1);
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
