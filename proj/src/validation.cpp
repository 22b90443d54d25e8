#include "fracstorm/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "fracstorm/config.hpp"
#include "fracstorm/error.hpp"
#include "fracstorm/excitation.hpp"
#include "fracstorm/fracfun.hpp"
#include "fracstorm/io.hpp"
#include "fracstorm/kernels.hpp"
#include "fracstorm/moments.hpp"
#include "fracstorm/quadrature.hpp"
#include "fracstorm/rng.hpp"
#include "fracstorm/simulate.hpp"

namespace fracstorm {

using std::numbers::pi;

namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

CheckResult make(std::string id, std::string title, bool pass, std::string measured, std::string tolerance,
                 std::string source) {
    return {std::move(id), std::move(title), pass, std::move(measured), std::move(tolerance), std::move(source), 0.0};
}

struct Check {
    std::string id;
    std::function<CheckResult()> run;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

EigenSystem unit_ball(double alpha, int n) { return make_eigen_system(alpha, 1.0, SpaceGrid(1.0, n)); }

ModelParams white_params(double beta, double lambda) {
    ModelParams p;
    p.beta = beta;
    p.lambda = lambda;
    return p;
}

// ------------------------------------------------------------------------------------------
// acceptance criteria

CheckResult criterion_special_functions() {
    double e1 = 0.0;
    for (int k = -500; k <= 500; ++k) {
        const double x = 0.01 * k;
        e1 = std::max(e1, rel(mittag_leffler(1.0, x), std::exp(x)));
    }
    const double ml_oracle = std::exp(1.0) * std::erfc(1.0);  // E_{1/2}(-z) = e^{z^2} erfc(z)
    const double ml = mittag_leffler(0.5, -1.0);
    const double g_oracle = std::exp(-0.25) / (2.0 * std::sqrt(pi));
    const double g = stable_subordinator_density(0.5, 1.0);
    const double f_oracle = std::exp(-0.25) / std::sqrt(pi);
    const double f = inverse_subordinator_density(0.5, 1.0, 1.0);
    const bool pass = e1 < 1e-12 && std::abs(ml - ml_oracle) < 1e-6 && std::abs(ml - 0.4275836) < 1e-6 &&
                      std::abs(g - g_oracle) < 1e-8 && std::abs(g - 0.2196956) < 1e-7 &&
                      std::abs(f - f_oracle) < 1e-8 && std::abs(f - 0.4393913) < 1e-7;
    return make("acceptance.1", "special-function oracles", pass,
                fmt("E1 rel %.2e; E1/2(-1)=%.9f; g1/2(1)=%.9f; fE1(1)=%.9f", e1, ml, g, f),
                "E1 1e-12; 1e-6; 1e-8; 1e-8", "closed forms exp, e^z^2 erfc z, Levy density");
}

// max |D^beta I^beta g - g| over t in [0.01, 1] on the 512-point mesh t_j = (j/511)^2
double left_inverse_error(const std::function<double(double)>& g, double beta) {
    const std::vector<double> t = graded_mesh(1.0, 511, 2.0);
    std::vector<double> v(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) v[j] = g(t[j]);
    const SampledFunction I = fractional_integral(SampledFunction(t, v), beta);
    double err = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (t[j] < 0.01) continue;
        err = std::max(err, std::abs(caputo_derivative(I, beta, t[j], CaputoScheme::quadratic) - g(t[j])));
    }
    return err;
}

CheckResult criterion_identity() {
    const std::vector<std::pair<std::string, std::function<double(double)>>> gs = {
        {"1", [](double) { return 1.0; }},
        {"t", [](double s) { return s; }},
        {"t^2", [](double s) { return s * s; }},
        {"sin t", [](double s) { return std::sin(s); }}};
    double worst = 0.0;
    std::string where;
    for (double beta : {0.3, 0.5, 0.8})
        for (const auto& [name, g] : gs) {
            const double e = left_inverse_error(g, beta);
            if (e >= worst) {
                worst = e;
                where = fmt("g=%s beta=%g", name.c_str(), beta);
            }
        }
    return make("acceptance.2", "left inverse D^b I^b g = g", worst < 1e-4,
                fmt("max error %.2e (%s)", worst, where.c_str()), "< 1e-4", "analytic identity");
}

CheckResult criterion_l2_law() {
    double worst = 0.0;
    std::string detail;
    for (auto [alpha, beta] : {std::pair{2.0, 0.5}, std::pair{2.0, 0.8}, std::pair{1.5, 0.5}}) {
        const double cstar = green_l2_constant(alpha, beta, 1.0, 1);
        // two times probe the power law; alpha < 2 kernels are costly, so one time suffices there
        const std::vector<double> times = alpha == 2.0 ? std::vector<double>{0.5, 2.0} : std::vector<double>{1.0};
        for (double t : times) {
            const double ratio = free_kernel_l2_squared(alpha, beta, 1.0, t) / (cstar * std::pow(t, -beta / alpha));
            worst = std::max(worst, std::abs(ratio - 1.0));
        }
    }
    const double c_heat = green_l2_constant(2.0, 1.0, 1.0, 1);
    const double c_err = std::abs(c_heat - 1.0 / std::sqrt(8.0 * pi));
    detail = fmt("max |ratio-1| %.2e; C*(2,1,1,1) err %.1e", worst, c_err);
    return make("acceptance.3", "L2 law int G_t^2 = C* t^(-bd/a)", worst < 1e-3 && c_err < 1e-6, detail,
                "0.1%; 1e-6", "spatial quadrature vs spectral constant; heat-kernel identity");
}

// the L2 law is the slowest kernel check and serves both the property suite and the criterion
const CheckResult& l2_law_once() {
    static const CheckResult r = criterion_l2_law();
    return r;
}

CheckResult criterion_cross_representation(std::uint64_t seed) {
    const EigenSystem es = unit_ball(2.0, 64);
    Philox4x32 rng(seed, 4);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const double t = std::pow(10.0, -rng.uniform());  // t in [0.1, 1]
        const int i = static_cast<int>(rng.next_u32() % 64);
        const int j = static_cast<int>(rng.next_u32() % 64);
        const double a = dirichlet_fractional_kernel(es, 0.5, t, i, j);
        const double b = dirichlet_kernel_subordination(es, 0.5, t, i, j);
        worst = std::max(worst, rel(b, a));
    }
    return make("acceptance.4", "spectral vs subordination G_B", worst < 1e-5, fmt("max rel diff %.2e", worst),
                "< 1e-5", "two independent representations");
}

// max over t and node pairs of G_B / G_free (free kernel evaluated once per distance)
double domain_ratio(const EigenSystem& es, double alpha, double beta, const std::vector<double>& times) {
    double worst = 0.0;
    const int n = es.size();
    for (double t : times) {
        const Eigen::MatrixXd G = dirichlet_kernel_matrix(es, beta, t);
        std::vector<double> free(n);
        for (int m = 0; m < n; ++m) free[m] = fractional_free_kernel(alpha, beta, es.nu, 1, t, m * es.grid.h);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) worst = std::max(worst, G(i, j) / free[std::abs(i - j)]);
    }
    return worst;
}

CheckResult criterion_kernel_floor() {
    const EigenSystem es = unit_ball(2.0, 64);
    const double ratio = domain_ratio(es, 2.0, 0.5, {0.001, 0.01, 0.1, 1.0});
    const KernelFloor fl = kernel_floor(es, 2.0, 0.5, 1.0);
    return make("acceptance.5", "G_B <= G_free and near-diagonal floor", ratio <= 1.01 && fl.C > 0.0 && fl.t0 > 0.0,
                fmt("max G_B/G_free %.4f; C=%.4g t0=%.4g", ratio, fl.C, fl.t0), "ratio <= 1.01; C > 0",
                "domain monotonicity; empirical floor");
}

// least-squares slope of log f over the last half of the samples
double late_growth_rate(const SampledFunction& f) {
    const auto t = f.times();
    const auto v = f.values();
    const std::size_t n = t.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, m = 0.0;
    for (std::size_t j = n / 2; j < n; ++j) {
        const double y = std::log(v[j]);
        sx += t[j];
        sy += y;
        sxx += t[j] * t[j];
        sxy += t[j] * y;
        m += 1.0;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

CheckResult criterion_renewal() {
    // equality case against the resolvent series sum (kappa Gamma(rho))^k t^{rho k} / Gamma(rho k + 1)
    const double rho = 0.5;
    const SampledFunction f = renewal_volterra_solve(1.0, 1.0, rho, 2.0, 1024);
    double err = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double z = std::tgamma(rho) * std::pow(f.times()[j], rho);
        double s = 0.0;
        for (int k = 0; k < 200; ++k) s += std::exp(k * std::log(std::max(z, 1e-300)) - std::lgamma(rho * k + 1.0));
        if (z == 0.0) s = 1.0;
        err = std::max(err, rel(f.values()[j], s));
    }
    double rate[2];
    int idx = 0;
    for (double kappa : {1.0, 4.0}) {
        const double T = 30.0 / renewal_growth_exponent(kappa, rho);
        rate[idx++] = late_growth_rate(renewal_volterra_solve(1.0, kappa, rho, T, 256));
    }
    const double ratio = rate[1] / rate[0];
    const double target = std::pow(4.0, 1.0 / rho);
    return make("acceptance.6", "renewal equality case and growth scaling",
                err < 1e-5 && std::abs(ratio / target - 1.0) <= 0.05,
                fmt("resolvent rel err %.2e; rate ratio %.4f (target %.0f)", err, ratio, target),
                "1e-5; 4^(1/rho) +-5%", "Mittag-Leffler resolvent series; growth-rate scaling");
}

ExcitationFit white_excitation(int n, int nt, double beta, const std::vector<double>& lambdas, int threads,
                               Functional functional = Functional::energy) {
    const EigenSystem es = unit_ball(2.0, n);
    ExcitationOptions opt;
    opt.nt = nt;
    opt.threads = threads;
    opt.functional = functional;
    return excitation_sweep(white_params(beta, 1.0), es, Eigen::VectorXd::Ones(n), 0.1, lambdas, Backend::volterra,
                            opt);
}

ExcitationFit colored_excitation(int n, int nt, const std::vector<double>& lambdas, int threads) {
    const EigenSystem es = unit_ball(2.0, n);
    ModelParams p = white_params(0.5, 1.0);
    p.noise = NoiseModel::riesz(0.5);
    ExcitationOptions opt;
    opt.nt = nt;
    opt.threads = threads;
    return excitation_sweep(p, es, Eigen::VectorXd::Ones(n), 0.1, lambdas, Backend::volterra, opt);
}

CheckResult criterion_white_index(int threads) {
    const ExcitationFit fit = white_excitation(96, 192, 0.5, geometric_grid(1e2, 1e6, 5), threads);
    return make("acceptance.7", "white-noise excitation index", fit.slope >= 2.40 && fit.slope <= 2.93,
                fmt("slope %.4f (theory %.7f)", fit.slope, fit.theory), "[2.40, 2.93]", "limit theorem 2a/(a-db)");
}

CheckResult criterion_colored_index(int threads) {
    const ExcitationFit fit = colored_excitation(32, 64, geometric_grid(1e2, 1e5, 5), threads);
    return make("acceptance.8", "Riesz-noise excitation index", fit.slope >= 2.01 && fit.slope <= 2.56,
                fmt("slope %.4f (theory %.7f)", fit.slope, fit.theory), "[2.01, 2.56]", "limit theorem 2a/(a-gb)");
}

CheckResult criterion_mc_vs_volterra(std::uint64_t seed, int threads) {
    const int n = 64;
    const int nt = 128;
    const EigenSystem es = unit_ball(2.0, n);
    const ModelParams p = white_params(0.5, 1.0);
    const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(n);
    SimConfig cfg;
    cfg.nx = n;
    cfg.nt = nt;
    cfg.T = 0.5;
    cfg.replicates = 2000;
    cfg.seed = seed;
    cfg.threads = threads;
    const MomentEstimate mc = simulate_mild(p, es, u0, cfg);
    const MomentField M = second_moment_white(p, es, u0, 1.0, cfg.T, nt);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        const int j = nt * (k % 5 + 1) / 5;
        const int i = 6 + 5 * k;
        worst = std::max(worst, std::abs(mc.mean(j, i) - M.M(j, i)) / mc.std_error(j, i));
    }
    return make("acceptance.9", "Monte Carlo vs Volterra second moment", worst <= 3.0 && mc.blowups == 0,
                fmt("max |z| %.3f over 10 probes; blow-ups %d", worst, mc.blowups), "|z| <= 3",
                "moment equation from the isometry");
}

CheckResult criterion_series() {
    double oracle = 0.0;
    for (int k = 1; k <= 40; ++k) oracle += std::pow(static_cast<double>(k), -k);
    const double s1 = lower_series(1.0, 1.0);
    const double theta = 1e6;
    const double rho = 0.75;
    const double ratio = std::log(log_lower_series(theta, rho)) / std::log(theta);
    const bool pass = std::abs(s1 - oracle) < 1e-10 && std::abs(s1 - 1.2912860) < 1e-7 && ratio >= 1.0 / rho - 0.15;
    return make("acceptance.10", "lower series S(theta)", pass,
                fmt("S(1)=%.12f; loglogS/log theta=%.4f", s1, ratio), "1e-10; >= 1/rho-0.15 = 1.1833",
                "direct partial sum; series lemma");
}

// ------------------------------------------------------------------------------------------
// property suites

std::vector<Check> fracfun_checks() {
    std::vector<Check> c;
    c.push_back({"fracfun.left_inverse", [] {
                     CheckResult r = criterion_identity();
                     r.id = "fracfun.left_inverse";
                     return r;
                 }});
    c.push_back({"fracfun.density_normalization", [] {
                     double worst = 0.0;
                     for (double beta : {0.3, 0.5, 0.8})
                         for (double t : {0.1, 1.0, 10.0}) {
                             const double mass = quad::integrate_half_line(
                                 [&](double x) { return inverse_subordinator_density(beta, t, x); },
                                 std::pow(t, beta), {.rel_tol = 1e-10});
                             worst = std::max(worst, std::abs(mass - 1.0));
                         }
                     return make("fracfun.density_normalization", "int f_Et = 1", worst < 1e-6,
                                 fmt("max |mass-1| %.2e", worst), "< 1e-6", "probability density");
                 }});
    c.push_back({"fracfun.laplace_ml", [] {
                     double worst = 0.0;
                     for (double beta : {0.5, 0.8})
                         for (double mu : {0.5, 1.0, 5.0}) {
                             const double lap = quad::integrate_half_line(
                                 [&](double s) { return std::exp(-mu * s) * inverse_subordinator_density(beta, 1.0, s); },
                                 1.0, {.rel_tol = 1e-10});
                             worst = std::max(worst, std::abs(lap - mittag_leffler(beta, -mu)));
                         }
                     return make("fracfun.laplace_ml", "Laplace transform of f_Et = E_b(-mu t^b)", worst < 1e-6,
                                 fmt("max abs diff %.2e", worst), "< 1e-6", "internal cross-check");
                 }});
    c.push_back({"fracfun.ml_monotone", [] {
                     bool ok = true;
                     double last_min = 1.0;
                     for (double beta : {0.3, 0.5, 0.8, 0.95}) {
                         double prev = mittag_leffler(beta, 0.0);
                         for (int k = 1; k <= 1000; ++k) {
                             const double v = mittag_leffler(beta, -0.1 * k);
                             ok = ok && v > 0.0 && v < prev;
                             prev = v;
                         }
                         last_min = std::min(last_min, prev);
                     }
                     return make("fracfun.ml_monotone", "x -> E_b(-x) positive, decreasing on [0,100]", ok,
                                 fmt("min E_b(-100) %.4g", last_min), "strict", "complete monotonicity");
                 }});
    c.push_back({"fracfun.gbeta_asymptotics", [] {
                     // the tail law's first correction is O(u^-beta) (3% at beta=0.7, u=100), so the 1% band
                     // is checked at u = 1000 and the two-term expansion at u = 100
                     const double beta = 0.7;
                     auto ratio = [beta](double u) {
                         return stable_subordinator_density(beta, u) * std::tgamma(1.0 - beta) *
                                std::pow(u, beta + 1.0) / beta;
                     };
                     const double tail = ratio(1000.0);
                     const double second = -std::tgamma(2.0 * beta + 1.0) / 2.0 * std::sin(2.0 * pi * beta) /
                                           (std::tgamma(beta + 1.0) * std::sin(pi * beta)) * std::pow(100.0, -beta);
                     const double two_term = std::abs(ratio(100.0) - 1.0 - second);
                     double head_worst = 0.0;
                     for (double b : {0.5, 0.7}) {
                         const double us = 0.05;  // beta = 0.7 underflows to 0 much below this
                         const double q = b / (1.0 - b);
                         const double A = std::sqrt(std::pow(b, 1.0 / (1.0 - b)) / (2.0 * pi * (1.0 - b)));
                         const double law = A * std::pow(us, -(2.0 - b) / (2.0 * (1.0 - b))) *
                                            std::exp(-(1.0 - b) * std::pow(b, q) * std::pow(us, -q));
                         head_worst = std::max(head_worst, std::abs(stable_subordinator_density(b, us) / law - 1.0));
                     }
                     const bool pass = std::abs(tail - 1.0) < 0.01 && two_term < 1e-3 && head_worst < 0.01 &&
                                       stable_subordinator_density(beta, -2.0) == 0.0;
                     return make("fracfun.gbeta_asymptotics", "g_b tail and head laws", pass,
                                 fmt("tail ratio-1 %.2e (u=1e3); two-term residual %.1e (u=100); head ratio-1 %.2e",
                                     tail - 1.0, two_term, head_worst),
                                 "< 1%; < 1e-3; < 1%", "asymptotic laws");
                 }});
    return c;
}

std::vector<Check> kernel_checks(std::uint64_t seed) {
    std::vector<Check> c;
    c.push_back({"kernels.scaling", [seed] {
                     Philox4x32 rng(seed, 11);
                     double worst = 0.0;
                     for (int k = 0; k < 50; ++k) {
                         const double alpha = (k % 3 == 0) ? 2.0 : (k % 3 == 1 ? 1.5 : 0.8);
                         const double s = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
                         const double t = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
                         const double x = 3.0 * rng.uniform();
                         const double lhs1 = stable_density(alpha, 1.0, 1, t, x);
                         const double rhs1 = std::pow(t, -1.0 / alpha) * stable_density(alpha, 1.0, 1, 1.0, std::pow(t, -1.0 / alpha) * x);
                         const double lhs2 = stable_density(alpha, 1.0, 1, s * t, x);
                         const double rhs2 = std::pow(s, -1.0 / alpha) * stable_density(alpha, 1.0, 1, t, std::pow(s, -1.0 / alpha) * x);
                         worst = std::max({worst, rel(lhs1, rhs1), rel(lhs2, rhs2)});
                     }
                     return make("kernels.scaling", "stable density self-similarity", worst < 1e-8,
                                 fmt("max rel diff %.2e", worst), "< 1e-8", "scaling identities");
                 }});
    c.push_back({"kernels.two_sided_bounds", [] {
                     double spread = 0.0;
                     std::string detail;
                     for (double alpha : {0.8, 1.5}) {
                         double lo = 1e300;
                         double hi = 0.0;
                         for (int a = -8; a <= 8; ++a)
                             for (int b = -8; b <= 8; ++b) {
                                 const double t = std::pow(10.0, 0.25 * a);
                                 const double x = std::pow(10.0, 0.25 * b);
                                 const double env = std::min(std::pow(t, -1.0 / alpha), t / std::pow(x, 1.0 + alpha));
                                 const double q = stable_density(alpha, 1.0, 1, t, x) / env;
                                 lo = std::min(lo, q);
                                 hi = std::max(hi, q);
                             }
                         spread = std::max(spread, hi / lo);
                         detail += fmt("%sa=%g c1=%.3g c2=%.3g", detail.empty() ? "" : "; ", alpha, lo, hi);
                     }
                     return make("kernels.two_sided_bounds", "c1 env <= p <= c2 env on a log lattice", spread < 50.0,
                                 detail, "c2/c1 < 50", "stable density bounds");
                 }});
    c.push_back({"kernels.l2_law", [] {
                     CheckResult r = l2_law_once();
                     r.id = "kernels.l2_law";
                     return r;
                 }});
    c.push_back({"kernels.domain_monotonicity", [] {
                     const EigenSystem es = unit_ball(1.5, 48);
                     const double ratio = domain_ratio(es, 1.5, 0.5, {0.01, 0.1, 1.0});
                     return make("kernels.domain_monotonicity", "G_B <= G_free (alpha=1.5)", ratio <= 1.01,
                                 fmt("max ratio %.4f", ratio), "<= 1.01", "killing lowers the kernel");
                 }});
    c.push_back({"kernels.positivity_floor", [] {
                     const EigenSystem es = unit_ball(2.0, 64);
                     const KernelFloor fl = kernel_floor(es, 2.0, 0.5, 1.0);
                     return make("kernels.positivity_floor", "near-diagonal floor G_B >= C t^(-b/a)",
                                 fl.C > 0.0 && fl.t0 > 0.0, fmt("C=%.4g t0=%.4g", fl.C, fl.t0), "C > 0, t0 > 0",
                                 "empirical floor");
                 }});
    return c;
}

std::vector<Check> moment_checks() {
    std::vector<Check> c;
    c.push_back({"moments.monotone", [] {
                     const int n = 32;
                     const EigenSystem es = unit_ball(2.0, n);
                     const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(n);
                     bool ok = true;
                     MomentField prev = second_moment_white(white_params(0.5, 0.0), es, u0, 1.0, 0.1, 32);
                     for (double lambda : {1.0, 3.0, 10.0}) {
                         const MomentField M = second_moment_white(white_params(0.5, lambda), es, u0, 1.0, 0.1, 32);
                         for (std::size_t j = 0; j < M.times.size(); ++j)
                             for (int i = 0; i < n; ++i)
                                 ok = ok && M.log_M(j, i) >= prev.log_M(j, i) - 1e-12;
                         prev = M;
                     }
                     const MomentField a = second_moment_white(white_params(0.5, 3.0), es, u0, 1.0, 0.1, 32);
                     const MomentField b = second_moment_white(white_params(0.5, 3.0), es, u0, 1.5, 0.1, 32);
                     for (std::size_t j = 0; j < a.times.size(); ++j)
                         for (int i = 0; i < n; ++i) ok = ok && b.log_M(j, i) >= a.log_M(j, i) - 1e-12;
                     return make("moments.monotone", "M nondecreasing in lambda and l", ok, ok ? "all grid points" : "violated",
                                 "pointwise", "positive Volterra kernel");
                 }});
    c.push_back({"moments.time_convergence", [] {
                     const int n = 64;
                     const EigenSystem es = unit_ball(2.0, n);
                     const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(n);
                     VolterraOptions o;
                     o.allow_asymptotic = false;
                     const MomentField a = second_moment_white(white_params(0.5, 10.0), es, u0, 1.0, 0.1, 64, o);
                     const MomentField b = second_moment_white(white_params(0.5, 10.0), es, u0, 1.0, 0.1, 128, o);
                     const double d = std::abs(std::expm1(b.log_sup(128) - a.log_sup(64)));
                     return make("moments.time_convergence", "doubling nt changes sup M(T) by < 2%", d < 0.02,
                                 fmt("relative change %.2e", d), "< 2%", "self-convergence");
                 }});
    c.push_back({"moments.renewal_sandwich", [] {
                     std::string detail;
                     bool ok = true;
                     for (auto [kappa, rho] : {std::pair{1.0, 0.5}, std::pair{4.0, 0.75}}) {
                         const double r = renewal_growth_exponent(kappa, rho);
                         const SampledFunction f = renewal_volterra_solve(1.0, kappa, rho, 20.0 / r, 256);
                         double lo = 1e300;
                         double hi = 0.0;
                         for (std::size_t j = 0; j < f.size(); ++j) {
                             const double q = f.values()[j] * std::exp(-r * f.times()[j]);
                             lo = std::min(lo, q);
                             hi = std::max(hi, q);
                         }
                         const double fitted = late_growth_rate(f) / r;
                         ok = ok && lo > 0.0 && hi / lo < 4.0 && std::abs(fitted - 1.0) < 0.05;
                         detail += fmt("%s(k=%g,r=%g) envelope [%.3f, %.3f] rate/scale %.4f", detail.empty() ? "" : "; ",
                                       kappa, rho, lo, hi, fitted);
                     }
                     return make("moments.renewal_sandwich", "c e^{rt} <= f <= C e^{rt}, r = (Gamma(rho) kappa)^(1/rho)",
                                 ok, detail, "C/c < 4; rate 1 +- 5%", "renewal envelopes");
                 }});
    c.push_back({"moments.upper_bound", [] {
                     const int n = 48;
                     const EigenSystem es = unit_ball(2.0, n);
                     const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(n);
                     const double theta = 8.0 / 3.0;
                     const double t = 0.1;
                     const double log_c1 = 1.0;  // sup u0^2 = 1, times e
                     std::vector<double> q;
                     for (double lambda : geometric_grid(10.0, 1e4, 3)) {
                         const MomentField M = second_moment_white(white_params(0.5, lambda), es, u0, 1.0, t, 48);
                         q.push_back((M.log_sup(48) - log_c1) / (std::pow(lambda, theta) * t));
                     }
                     const double c2 = *std::max_element(q.begin(), q.end());
                     const bool ok = std::isfinite(c2) && c2 > 0.0 && q.back() >= 0.5 * c2;
                     return make("moments.upper_bound", "sup M <= c1 exp(c2 lambda^(8/3) t)", ok,
                                 fmt("c1=e c2=%.4g; top-lambda quotient %.4g", c2, q.back()),
                                 "c2 finite; quotient not decaying", "upper-bound theorem");
                 }});
    return c;
}

SimConfig small_sim(std::uint64_t seed, int threads) {
    SimConfig cfg;
    cfg.nx = 32;
    cfg.nt = 32;
    cfg.T = 0.1;
    cfg.replicates = 256;
    cfg.seed = seed;
    cfg.threads = threads;
    return cfg;
}

std::vector<Check> simulate_checks(std::uint64_t seed, int threads) {
    std::vector<Check> c;
    c.push_back({"simulate.determinism", [seed] {
                     const EigenSystem es = unit_ball(2.0, 32);
                     const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(32);
                     SimConfig cfg = small_sim(seed, 1);
                     const MomentEstimate a = simulate_mild(white_params(0.5, 1.0), es, u0, cfg);
                     cfg.threads = 4;
                     const MomentEstimate b = simulate_mild(white_params(0.5, 1.0), es, u0, cfg);
                     const bool same = (a.mean.array() == b.mean.array()).all() &&
                                       (a.std_error.array() == b.std_error.array()).all();
                     return make("simulate.determinism", "bitwise identical for 1 and 4 threads", same,
                                 same ? "identical" : "differs", "bitwise", "counter-based streams, fixed tree");
                 }});
    c.push_back({"simulate.zero_data", [seed, threads] {
                     const EigenSystem es = unit_ball(2.0, 32);
                     const MomentEstimate a =
                         simulate_mild(white_params(0.5, 5.0), es, Eigen::VectorXd::Zero(32), small_sim(seed, threads));
                     const double m = a.mean.cwiseAbs().maxCoeff();
                     return make("simulate.zero_data", "u0 = 0 stays 0", m == 0.0, fmt("max mean %.1e", m), "exactly 0",
                                 "sigma(0) = 0");
                 }});
    c.push_back({"simulate.stderr_scaling", [seed, threads] {
                     const EigenSystem es = unit_ball(2.0, 32);
                     const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(32);
                     SimConfig cfg = small_sim(seed, threads);
                     cfg.replicates = 512;
                     const MomentEstimate a = simulate_mild(white_params(0.5, 1.0), es, u0, cfg);
                     cfg.replicates = 1024;
                     const MomentEstimate b = simulate_mild(white_params(0.5, 1.0), es, u0, cfg);
                     auto median = [](const Eigen::MatrixXd& m) {
                         std::vector<double> v(m.data(), m.data() + m.size());
                         v.erase(std::remove(v.begin(), v.end(), 0.0), v.end());
                         std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
                         return v[v.size() / 2];
                     };
                     const double ratio = median(b.std_error) / median(a.std_error);
                     return make("simulate.stderr_scaling", "doubling replicates scales stderr by 1/sqrt 2",
                                 std::abs(ratio * std::sqrt(2.0) - 1.0) <= 0.15, fmt("ratio %.4f", ratio),
                                 "0.7071 +- 15%", "central limit theorem");
                 }});
    c.push_back({"simulate.deterministic_positive", [] {
                     double worst = 0.0;
                     for (double alpha : {2.0, 1.5}) {
                         const EigenSystem es = unit_ball(alpha, 64);
                         for (double t : {1e-4, 1e-2, 1.0})
                             worst = std::min(worst, apply_semigroup(es, 0.5, t, Eigen::VectorXd::Ones(64)).minCoeff());
                     }
                     return make("simulate.deterministic_positive", "(G_B u0)_t >= -1e-10 for u0 >= 0", worst >= -1e-10,
                                 fmt("min %.2e", worst), ">= -1e-10", "positivity of the kernel");
                 }});
    c.push_back({"simulate.classical_limit", [seed, threads] {
                     const EigenSystem es = unit_ball(2.0, 32);
                     const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(32);
                     const SimConfig cfg = small_sim(seed, threads);
                     const ModelParams p = white_params(1.0, 1.0);
                     const MomentEstimate a = simulate_mild(p, es, u0, cfg);
                     const MomentEstimate b = simulate_markov_reference(p, es, u0, cfg);
                     double worst = 0.0;
                     for (Eigen::Index j = 1; j < a.mean.rows(); ++j)
                         for (Eigen::Index i = 0; i < a.mean.cols(); ++i)
                             worst = std::max(worst, std::abs(a.mean(j, i) - b.mean(j, i)) / a.std_error(j, i));
                     return make("simulate.classical_limit", "beta = 1 matches Markovian stepping", worst <= 3.0,
                                 fmt("max |diff|/stderr %.2e", worst), "<= 3", "classical stochastic heat equation");
                 }});
    return c;
}

std::vector<Check> excitation_checks(std::uint64_t seed, int threads) {
    std::vector<Check> c;
    c.push_back({"excitation.theory_values", [] {
                     const double a = theoretical_index(2.0, 0.5, 1, NoiseModel::white());
                     const double b = theoretical_index(2.0, 1.0, 1, NoiseModel::white());
                     const double g = theoretical_index(2.0, 0.5, 0.5, NoiseModel::riesz(0.5));
                     const bool ok = std::abs(a - 8.0 / 3.0) < 1e-12 && std::abs(b - 4.0) < 1e-12 &&
                                     std::abs(g - 16.0 / 7.0) < 1e-12;
                     return make("excitation.theory_values", "2a/(a-db), 2a/(a-gb)", ok,
                                 fmt("%.7f %.7f %.7f", a, b, g), "8/3, 4, 16/7", "index formulas");
                 }});
    c.push_back({"excitation.monotone_and_stable", [threads] {
                     const ExcitationFit fit = white_excitation(48, 96, 0.5, geometric_grid(1e2, 1e5, 4), threads);
                     bool monotone = true;
                     for (std::size_t i = 1; i < fit.log_values.size(); ++i)
                         monotone = monotone && fit.log_values[i] > fit.log_values[i - 1];
                     ExcitationFit shifted = fit;
                     shifted.lambdas.pop_back();
                     shifted.log_values.pop_back();
                     fit_top_decade(shifted);
                     const double shift = std::abs(shifted.slope - fit.slope);
                     return make("excitation.monotone_and_stable", "log E increasing; window shift moves slope < 0.1",
                                 monotone && shift < 0.1, fmt("slope %.4f, shifted %.4f", fit.slope, shifted.slope),
                                 "strict; < 0.1", "fit robustness");
                 }});
    c.push_back({"excitation.beta_ordering", [threads] {
                     const auto grid = geometric_grid(1e2, 1e5, 4);
                     const ExcitationFit a = white_excitation(48, 96, 0.5, grid, threads);
                     const ExcitationFit b = white_excitation(48, 96, 0.8, grid, threads);
                     return make("excitation.beta_ordering", "slope increases with beta", b.slope > a.slope,
                                 fmt("beta=0.5: %.4f; beta=0.8: %.4f (theory %.4f, %.4f)", a.slope, b.slope, a.theory,
                                     b.theory),
                                 "ordered", "index formula monotone in beta");
                 }});
    c.push_back({"excitation.position", [threads] {
                     const int n = 48;
                     const EigenSystem es = unit_ball(2.0, n);
                     ExcitationOptions opt;
                     opt.nt = 96;
                     opt.threads = threads;
                     const PositionReport rep = index_vs_position_check(
                         white_params(0.5, 1.0), es, Eigen::VectorXd::Ones(n), 0.1, 0.25, geometric_grid(1e2, 1e5, 4), opt);
                     return make("excitation.position", "pointwise slopes agree across interior probes",
                                 rep.max_deviation < 0.1 && rep.center_vs_energy < 0.1,
                                 fmt("probe spread %.4f; centre vs energy %.4f", rep.max_deviation, rep.center_vs_energy),
                                 "< 0.1", "pointwise index is position-free");
                 }});
    c.push_back({"excitation.backend_agreement", [seed, threads] {
                     const int n = 32;
                     const EigenSystem es = unit_ball(2.0, n);
                     const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(n);
                     const std::vector<double> lambdas = {0.5, 1.0, 2.0, 3.0};
                     ExcitationOptions opt;
                     opt.nt = 64;
                     opt.threads = threads;
                     opt.montecarlo.nt = 64;
                     opt.montecarlo.replicates = 2000;
                     opt.montecarlo.seed = seed;
                     double worst = 0.0;
                     for (double lambda : lambdas) {
                         ModelParams p = white_params(0.5, lambda);
                         SimConfig cfg = opt.montecarlo;
                         cfg.nx = n;
                         cfg.T = 0.1;
                         cfg.threads = threads;
                         const MomentEstimate mc = simulate_mild(p, es, u0, cfg);
                         const MomentField M = second_moment_white(p, es, u0, 1.0, 0.1, 64);
                         const Eigen::Index last = mc.mean.rows() - 1;
                         const double total = mc.mean.row(last).sum();
                         // cell estimates are correlated; their summed standard errors bound the error of the sum
                         const double se = mc.std_error.row(last).sum();
                         const double vol = std::exp(M.log_integral(64)) / es.grid.h;
                         worst = std::max(worst, std::abs(total - vol) / se);
                     }
                     return make("excitation.backend_agreement", "Monte Carlo and Volterra energy agree (lambda <= 3)",
                                 worst <= 3.0, fmt("max |z| %.3f", worst), "<= 3 standard errors",
                                 "moment equation from the isometry");
                 }});
    return c;
}

std::vector<Check> cli_checks() {
    std::vector<Check> c;
    c.push_back({"cli.config_roundtrip", [] {
                     RunConfig a;
                     RunConfig b = RunConfig::parse("model.alpha = 1.5\nnoise.kind = riesz\nnoise.gamma = 0.3\n"
                                                    "sigma.table = 0:0;1:0.5;2:2\ninitial.u0 = bump:2\nrun.seed = 7\n");
                     const bool ok = RunConfig::parse(a.serialize()) == a && RunConfig::parse(b.serialize()) == b;
                     return make("cli.config_roundtrip", "parse(serialize(c)) == c", ok, ok ? "equal" : "differs",
                                 "exact", "serialization contract");
                 }});
    c.push_back({"cli.csv_header", [] {
                     RunConfig cfg;
                     const std::string csv = io::CsvWriter(cfg.summary(), {"a", "b"}).row({"1", "2"}).str();
                     const bool ok = csv.rfind("# fracstorm ", 0) == 0 && csv.find("seed=") != std::string::npos &&
                                     csv.find("\r\na,b\r\n") != std::string::npos;
                     return make("cli.csv_header", "CSV carries a comment line and header row", ok,
                                 ok ? "present" : "missing", "both lines", "reproducibility contract");
                 }});
    return c;
}

std::vector<Check> acceptance_checks(std::uint64_t seed, int threads) {
    std::vector<Check> c;
    for (int k = 1; k <= 10; ++k)
        c.push_back({"acceptance." + std::to_string(k), [k, seed, threads] { return acceptance_criterion(k, seed, threads); }});
    return c;
}

bool selected(const std::vector<std::string>& only, const std::string& suite, const std::string& id) {
    if (only.empty()) return true;
    for (const auto& o : only)
        if (o == suite || o == id) return true;
    return false;
}

}  // namespace

double free_kernel_l2_squared(double alpha, double beta, double nu, double t) {
    const double scale = std::pow(nu * std::pow(t, beta), 1.0 / alpha);
    auto f = [&](double r) {
        const double g = fractional_free_kernel(alpha, beta, nu, 1, t, r);
        return g * g;
    };
    return 2.0 * quad::integrate_half_line(f, scale, {.rel_tol = 1e-6});
}

const std::vector<std::string>& validation_suites() {
    static const std::vector<std::string> s = {"fracfun", "kernels", "moments", "simulate", "excitation", "cli",
                                               "acceptance"};
    return s;
}

CheckResult acceptance_criterion(int k, std::uint64_t seed, int threads) {
    switch (k) {
        case 1: return criterion_special_functions();
        case 2: return criterion_identity();
        case 3: return l2_law_once();
        case 4: return criterion_cross_representation(seed);
        case 5: return criterion_kernel_floor();
        case 6: return criterion_renewal();
        case 7: return criterion_white_index(threads);
        case 8: return criterion_colored_index(threads);
        case 9: return criterion_mc_vs_volterra(seed, threads);
        case 10: return criterion_series();
        default: domain_fail("acceptance criterion must lie in 1..10");
    }
}

std::vector<CheckResult> run_validation(const ValidationOptions& opt,
                                        const std::function<void(const CheckResult&)>& progress) {
    std::vector<std::pair<std::string, std::vector<Check>>> suites = {
        {"fracfun", fracfun_checks()},
        {"kernels", kernel_checks(opt.seed)},
        {"moments", moment_checks()},
        {"simulate", simulate_checks(opt.seed, opt.threads)},
        {"excitation", excitation_checks(opt.seed, opt.threads)},
        {"cli", cli_checks()},
        {"acceptance", acceptance_checks(opt.seed, opt.threads)}};
    for (const auto& o : opt.only) {
        bool known = false;
        for (const auto& [name, checks] : suites) {
            known = known || o == name;
            for (const auto& ch : checks) known = known || o == ch.id;
        }
        if (!known) domain_fail("validate: unknown suite or check '" + o + "'");
    }
    std::vector<CheckResult> out;
    for (const auto& [name, checks] : suites)
        for (const auto& ch : checks) {
            if (!selected(opt.only, name, ch.id)) continue;
            const auto start = std::chrono::steady_clock::now();
            CheckResult r;
            try {
                r = ch.run();
            } catch (const std::exception& e) {
                r = make(ch.id, "exception", false, e.what(), "-", "-");
            }
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (progress) progress(r);
            out.push_back(std::move(r));
        }
    return out;
}

std::string format_report(const std::vector<CheckResult>& results) {
    std::ostringstream os;
    int passed = 0;
    for (const auto& r : results) {
        os << (r.pass ? "PASS" : "FAIL") << "  " << r.id << "  " << r.title << " | measured: " << r.measured
           << " | tolerance: " << r.tolerance << " | source: " << r.source << "\n";
        passed += r.pass;
    }
    os << passed << "/" << results.size() << " checks passed\n";
    return os.str();
}

}  // namespace fracstorm
