#include <algorithm>
#include <cmath>
#include <limits>

#include "fracstorm/error.hpp"
#include "fracstorm/moments.hpp"

namespace fracstorm {

namespace {

// Product-integration solve of f = c1 + kappa int_0^t (t-s)^{rho-1} f(s) ds on a graded mesh,
// f piecewise linear, singular weights integrated analytically per cell.
std::vector<double> renewal_pass(double c1, double kappa, double rho, const std::vector<double>& t) {
    const std::size_t n = t.size();
    std::vector<double> f(n, c1);
    // D0 = int_a^b u^{rho-1} du, D1 = int_a^b u^{rho-1} (b - u) du with a = t_j - t_{k+1}, b = t_j - t_k
    auto moments = [rho](double a, double b, double& d0, double& d1) {
        const double brho = std::pow(b, rho);
        d0 = a > 0.0 ? -brho * std::expm1(rho * std::log(a / b)) / rho : brho / rho;
        const double i1 = a > 0.0 ? -(brho * b) * std::expm1((rho + 1.0) * std::log(a / b)) / (rho + 1.0)
                                  : brho * b / (rho + 1.0);
        d1 = b * d0 - i1;
    };
    for (std::size_t j = 1; j < n; ++j) {
        double acc = 0.0;
        double diag = 0.0;
        for (std::size_t k = 0; k < j; ++k) {
            const double a = t[j] - t[k + 1];
            const double b = t[j] - t[k];
            double d0 = 0.0;
            double d1 = 0.0;
            moments(a, b, d0, d1);
            const double w_next = d1 / (t[k + 1] - t[k]);  // weight of f(t_{k+1})
            const double w_prev = d0 - w_next;               // weight of f(t_k)
            acc += w_prev * f[k];
            if (k + 1 == j) {
                diag = w_next;
            } else {
                acc += w_next * f[k + 1];
            }
        }
        const double denom = 1.0 - kappa * diag;
        if (!(denom > 0.0)) numerical_fail("renewal solve: time step too large for the implicit update");
        f[j] = (c1 + kappa * acc) / denom;
        if (!std::isfinite(f[j])) numerical_fail("renewal solve overflowed");
    }
    return f;
}

}  // namespace

SampledFunction renewal_volterra_solve(double c1, double kappa, double rho, double T, int nt) {
    if (!(rho > 0.0)) domain_fail("renewal_volterra_solve: rho > 0 required");
    if (!(kappa >= 0.0)) domain_fail("renewal_volterra_solve: kappa >= 0 required");
    if (!(T > 0.0) || nt < 2) domain_fail("renewal_volterra_solve: T > 0 and nt >= 2 required");
    if (!std::isfinite(c1)) domain_fail("renewal_volterra_solve: c1 must be finite");
    const double grading = std::max(1.0, 2.0 / rho);
    const std::vector<double> coarse = graded_mesh(T, static_cast<std::size_t>(nt), grading);
    const std::vector<double> fine = graded_mesh(T, 2 * static_cast<std::size_t>(nt), grading);
    const std::vector<double> fc = renewal_pass(c1, kappa, rho, coarse);
    const std::vector<double> ff = renewal_pass(c1, kappa, rho, fine);
    // the graded meshes are nested (fine node 2j = coarse node j); the O(n^-2) error term is
    // removed by Richardson extrapolation
    std::vector<double> v(coarse.size());
    for (std::size_t j = 0; j < coarse.size(); ++j) v[j] = (4.0 * ff[2 * j] - fc[j]) / 3.0;
    return SampledFunction(coarse, v);
}

double renewal_growth_exponent(double kappa, double rho) {
    if (!(rho > 0.0) || !(kappa >= 0.0)) domain_fail("renewal_growth_exponent: rho > 0 and kappa >= 0 required");
    return std::pow(std::tgamma(rho) * kappa, 1.0 / rho);
}

double log_lower_series(double t, double rho) {
    if (!(t >= 0.0) || !(rho > 0.0)) domain_fail("lower_series: t >= 0 and rho > 0 required");
    if (t == 0.0) return -std::numeric_limits<double>::infinity();
    const double lt = std::log(t);
    auto term = [&](double k) { return k * (lt - rho * std::log(k)); };
    // log-terms are concave in k with maximum at k* = t^{1/rho} / e
    const double kstar = std::exp(lt / rho - 1.0);
    const double k0 = std::max(1.0, std::floor(kstar));
    double peak = std::max(term(k0), term(k0 + 1.0));
    if (k0 == 1.0) peak = std::max(peak, term(1.0));
    // terms decay at least geometrically away from the peak; e^{-40} relative is below double resolution
    double sum = 0.0;
    for (double k = k0; k >= 1.0; k -= 1.0) {
        const double d = term(k) - peak;
        sum += std::exp(d);
        if (d < -40.0) break;
    }
    for (double k = k0 + 1.0;; k += 1.0) {
        const double d = term(k) - peak;
        sum += std::exp(d);
        if (d < -40.0 && k > kstar) break;
    }
    return peak + std::log(sum);
}

double lower_series(double t, double rho) {
    const double l = log_lower_series(t, rho);
    if (l > std::log(std::numeric_limits<double>::max())) return std::numeric_limits<double>::infinity();
    return std::exp(l);
}

double log_colored_lower_bound_series(const ModelParams& params, double gamma, double l_sigma, double lambda,
                                      double t, double g_t, double c1) {
    if (!(g_t > 0.0)) domain_fail("colored_lower_bound_series: g_t > 0 required");
    if (!(t > 0.0) || !(c1 > 0.0)) domain_fail("colored_lower_bound_series: t > 0 and c1 > 0 required");
    const double rho = (params.alpha - gamma * params.beta) / params.alpha;
    if (!(rho > 0.0)) domain_fail("colored_lower_bound_series: alpha - gamma beta > 0 required");
    const double base = 2.0 * std::log(g_t);
    if (lambda == 0.0 || l_sigma == 0.0) return base;
    // (lambda^2 l^2 c1)^k (t/k)^{k rho} = (theta / k^rho)^k with theta = lambda^2 l^2 c1 t^rho
    const double theta = lambda * lambda * l_sigma * l_sigma * c1 * std::pow(t, rho);
    const double ls = log_lower_series(theta, rho);
    // log(1 + S)
    return base + (ls > 0.0 ? ls + std::log1p(std::exp(-ls)) : std::log1p(std::exp(ls)));
}

double colored_lower_bound_series(const ModelParams& params, double gamma, double l_sigma, double lambda, double t,
                                  double g_t, double c1) {
    const double l = log_colored_lower_bound_series(params, gamma, l_sigma, lambda, t, g_t, c1);
    if (l > std::log(std::numeric_limits<double>::max())) return std::numeric_limits<double>::infinity();
    return std::exp(l);
}

double colored_floor_constant(const KernelFloor& floor) {
    if (!(floor.C > 0.0)) domain_fail("colored_floor_constant: the kernel floor constant must be positive");
    return floor.C * floor.C;
}

InitialFloor initial_term_floor(const EigenSystem& es, double beta, const Eigen::VectorXd& u0, double epsilon,
                                double t, double t0) {
    const double R = es.grid.R;
    if (!(epsilon > 0.0 && epsilon < R)) domain_fail("initial_term_floor: epsilon must lie in (0, R)");
    if (!(t >= 0.0) || !(t0 > 0.0)) domain_fail("initial_term_floor: t >= 0 and t0 > 0 required");
    if (u0.size() != es.size()) domain_fail("initial_term_floor: u0 must be sampled on the grid");
    if ((u0.array() < 0.0).any()) domain_fail("initial_term_floor: u0 must be nonnegative");
    if (u0.maxCoeff() == 0.0) return {0.0, true};
    const std::vector<int> inner = es.grid.interior(R - epsilon);
    if (inner.empty()) domain_fail("initial_term_floor: no grid node inside B(0, R - epsilon)");
    double floor = std::numeric_limits<double>::infinity();
    const int samples = 64;
    for (int k = 0; k < samples; ++k) {
        const double s = t * k / (samples - 1);
        const Eigen::VectorXd g = apply_semigroup(es, beta, s + t0, u0);
        for (int i : inner) floor = std::min(floor, g[i]);
    }
    return {std::max(floor, 0.0), false};
}

}  // namespace fracstorm
