#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fracstorm {

/// One line of the validation report.
struct CheckResult {
    std::string id;         ///< "<suite>.<name>", e.g. "kernels.l2_law" or "acceptance.7"
    std::string title;      ///< short human-readable description
    bool pass = false;
    std::string measured;   ///< measured value(s)
    std::string tolerance;  ///< acceptance band
    std::string source;     ///< kind of reference: closed form, independent oracle, theory, self-consistency
    double seconds = 0.0;   ///< wall time (not part of the formatted report)
};

struct ValidationOptions {
    std::vector<std::string> only;  ///< suite names or check ids; empty: everything
    std::uint64_t seed = 42;        ///< seed of every randomised check
    int threads = 0;                ///< 0: OpenMP default
};

/// Suites in execution order: fracfun, kernels, moments, simulate, excitation, cli, acceptance.
const std::vector<std::string>& validation_suites();

/// Runs the selected property suites and acceptance criteria. `progress` sees every result as
/// soon as it is available. DomainError for an unknown suite or check name.
std::vector<CheckResult> run_validation(const ValidationOptions& opt,
                                        const std::function<void(const CheckResult&)>& progress = {});

/// Acceptance criterion k in 1..10.
CheckResult acceptance_criterion(int k, std::uint64_t seed = 42, int threads = 0);

/// Fixed-width pass/fail table; contains no timings, so equal inputs give identical bytes.
std::string format_report(const std::vector<CheckResult>& results);

/// 2 int_0^inf G_t(r)^2 dr for the free kernel in d = 1 by adaptive quadrature in r.
double free_kernel_l2_squared(double alpha, double beta, double nu, double t);

}  // namespace fracstorm
