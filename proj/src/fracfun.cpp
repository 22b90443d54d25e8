#include "fracstorm/fracfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fracstorm/error.hpp"
#include "fracstorm/quadrature.hpp"

namespace fracstorm {

using std::numbers::pi;

FracOrder::FracOrder(double b) : beta(b) {
    if (!(b > 0.0 && b <= 1.0)) domain_fail("fractional order beta must lie in (0, 1], got " + std::to_string(b));
}

SampledFunction::SampledFunction(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    require(times_.size() >= 2, "SampledFunction needs at least two samples");
    require(times_.size() == values_.size(), "SampledFunction: times and values differ in length");
    require(times_.front() == 0.0, "SampledFunction: times[0] must be 0");
    for (std::size_t i = 1; i < times_.size(); ++i) {
        require(times_[i] > times_[i - 1], "SampledFunction: times must be strictly increasing");
    }
    for (double v : values_) require(std::isfinite(v), "SampledFunction: values must be finite");
}

double SampledFunction::operator()(double t) const {
    require(t >= 0.0 && t <= t_max(), "SampledFunction: t outside sampled range");
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.end()) return values_.back();
    const std::size_t j = static_cast<std::size_t>(it - times_.begin()) - 1;
    const double w = (t - times_[j]) / (times_[j + 1] - times_[j]);
    return values_[j] + w * (values_[j + 1] - values_[j]);
}

std::vector<double> graded_mesh(double t_max, std::size_t n, double grading) {
    require(t_max > 0.0 && n >= 1 && grading >= 1.0, "graded_mesh: need t_max > 0, n >= 1, grading >= 1");
    std::vector<double> t(n + 1);
    for (std::size_t j = 0; j <= n; ++j) t[j] = t_max * std::pow(static_cast<double>(j) / n, grading);
    t[n] = t_max;
    return t;
}

namespace detail {

double rgamma(double x) {
    if (x <= 0.0 && x == std::floor(x)) return 0.0;
    if (x > 170.0) return std::exp(-std::lgamma(x));
    if (x < -170.0) {
        // reflection: 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi
        const double s = std::sin(pi * x);
        return std::copysign(std::exp(std::lgamma(1.0 - x) + std::log(std::abs(s)) - std::log(pi)), s);
    }
    return 1.0 / std::tgamma(x);
}

double mittag_leffler_series(double beta, double x) {
    if (x >= 0.0) {
        const double lx = std::log(x);
        double sum = 1.0;
        for (int k = 1; k < 200000; ++k) {
            const double lt = k * lx - std::lgamma(1.0 + beta * k);
            if (lt > 709.0) numerical_fail("mittag_leffler: E_beta(x) overflows double precision");
            const double term = std::exp(lt);
            sum += term;
            // terms are log-concave in k: once decreasing and negligible we are done
            if (term < 1e-17 * sum && k * lx < std::lgamma(1.0 + beta * k) + lx) break;
        }
        if (!std::isfinite(sum)) numerical_fail("mittag_leffler: E_beta(x) overflows double precision");
        return sum;
    }
    double sum = 1.0;
    double xp = 1.0;
    for (int k = 1; k < 2000; ++k) {
        xp *= x;
        const double term = xp * rgamma(1.0 + beta * k);
        sum += term;
        if (std::abs(xp) < 1e-18 || (std::abs(term) < 1e-18 * std::abs(sum) && k > 4)) break;
    }
    return sum;
}

// E_beta(-y) = sin(beta pi)/(pi beta y) int_0^inf exp(-w^{1/beta}) / ((w/y)^2 + 2 (w/y) cos(beta pi) + 1) dw
double mittag_leffler_integral(double beta, double x) {
    const double y = -x;
    const double c = std::cos(beta * pi);
    const double inv_beta = 1.0 / beta;
    auto f = [&](double w) {
        const double s = w / y;
        return std::exp(-std::pow(w, inv_beta)) / (s * s + 2.0 * s * c + 1.0);
    };
    const double w_max = std::pow(60.0, beta);
    std::array<double, 5> br{};
    std::size_t nb = 0;
    br[nb++] = 0.0;
    const double w_peak = -c * y;
    if (w_peak > 0.0 && w_peak < w_max) {
        const double width = std::sin(beta * pi) * y;
        if (w_peak - width > 0.0) br[nb++] = w_peak - width;
        br[nb++] = w_peak;
        if (w_peak + width < w_max) br[nb++] = w_peak + width;
    } else if (w_max > 1.0) {
        br[nb++] = 1.0;
    }
    br[nb++] = w_max;
    const double integral =
        quad::integrate_breaks(f, std::span<const double>(br.data(), nb), {.rel_tol = 1e-10, .abs_tol = 0.0});
    return std::sin(beta * pi) / (pi * beta * y) * integral;
}

// E_beta(-y) ~ sum_{k>=1} (-1)^{k+1} y^{-k} / Gamma(1 - beta k), optimally truncated.
double mittag_leffler_asymptotic(double beta, double x) {
    const double y = -x;
    const double ly = std::log(y);
    double sum = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 5000; ++k) {
        const double z = 1.0 - beta * k;
        // |1/Gamma(z)| = Gamma(1-z) |sin(pi z)| / pi for z < 1; truncate on the smooth envelope
        // Gamma(1-z)/pi y^-k, since the sine factor makes individual terms non-monotone.
        const double env = std::exp(std::lgamma(1.0 - z) - std::log(pi) - k * ly);
        if (env > prev) break;
        prev = env;
        const double s = (z <= 0.0 && z == std::floor(z)) ? 0.0 : std::sin(pi * z);
        sum += ((k % 2 == 1) ? 1.0 : -1.0) * s * env;
        if (env < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

double subordinator_density_series(double beta, double u) {
    const double lu = std::log(u);
    double sum = 0.0;
    for (int k = 1; k < 5000; ++k) {
        const double lmag = std::lgamma(beta * k + 1.0) - std::lgamma(k + 1.0) - (beta * k + 1.0) * lu;
        const double s = std::sin(pi * beta * k);
        const double term = ((k % 2 == 1) ? 1.0 : -1.0) * s * std::exp(lmag);
        sum += term;
        if (k > 2 && std::exp(lmag) < 1e-18 * std::abs(sum)) break;
    }
    return sum / pi;
}

// Zolotarev/Kanter representation:
// g(u) = beta/((1-beta) pi) u^{-1/(1-beta)} int_0^pi A(phi) exp(-u^{-beta/(1-beta)} A(phi)) dphi,
// A(phi) = sin(beta phi)^{beta/(1-beta)} sin((1-beta) phi) / sin(phi)^{1/(1-beta)}.
double subordinator_density_integral(double beta, double u) {
    const double ob = 1.0 - beta;
    const double a0 = std::pow(beta, beta / ob) * ob;  // A(0+)
    // log(A(phi)/A(0)) written with ratios that tend to one as phi -> 0, avoiding cancellation.
    auto log_ratio = [&](double phi) {
        const double sp = std::sin(phi);
        return (beta / ob) * std::log(std::sin(beta * phi) / (beta * sp)) + std::log(std::sin(ob * phi) / (ob * sp));
    };
    const double c = std::pow(u, -beta / ob);
    const double ca0 = c * a0;
    if (ca0 > 745.0) return 0.0;
    auto excess = [&](double phi) { return ca0 * std::expm1(log_ratio(phi)); };  // c (A - A(0))
    auto f = [&](double phi) {
        if (phi <= 0.0) return a0;
        if (phi >= pi) return 0.0;
        const double lr = log_ratio(phi);
        const double e = ca0 * std::expm1(lr);
        if (!std::isfinite(e) || e > 745.0) return 0.0;
        return a0 * std::exp(lr - e);
    };
    // Break the range at the level sets c*(A(phi) - A(0)) = 10^k (A increases monotonically on
    // (0, pi)), which resolves the peak of A exp(-cA) however sharp it is, and stop where the
    // integrand has decayed by e^-60 relative to its peak.
    auto level_set = [&](double target) {
        double lo = 0.0;
        double hi = pi;
        for (int i = 0; i < 100; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double e = excess(mid);
            if (std::isfinite(e) && e < target) lo = mid; else hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    std::vector<double> br{0.0};
    const int k_lo = std::min(-1, static_cast<int>(std::floor(std::log10(ca0))));
    for (int k = k_lo; k <= 1; ++k) {
        const double phi = level_set(std::pow(10.0, k));
        if (phi > br.back()) br.push_back(phi);
    }
    const double phi_end = level_set(60.0);
    if (phi_end > br.back()) br.push_back(phi_end);
    const double integral = quad::integrate_breaks(f, br, {.rel_tol = 1e-10, .abs_tol = 0.0});
    const double log_pref = std::log(beta / (ob * pi)) - std::log(u) / ob - ca0;
    return std::exp(log_pref) * integral;
}

}  // namespace detail

double mittag_leffler(double beta, double x) {
    if (!(beta > 0.0 && beta <= 1.0)) domain_fail("mittag_leffler: beta must lie in (0, 1], got " + std::to_string(beta));
    if (!std::isfinite(x)) domain_fail("mittag_leffler: argument must be finite");
    if (beta == 1.0) {
        const double v = std::exp(x);
        if (!std::isfinite(v)) numerical_fail("mittag_leffler: E_1(x) overflows double precision");
        return v;
    }
    if (x == 0.0) return 1.0;
    if (x > 0.0 || x >= -1.0) return detail::mittag_leffler_series(beta, x);
    const double y = -x;
    if (std::pow(y, 1.0 / beta) >= 40.0) return detail::mittag_leffler_asymptotic(beta, x);
    return detail::mittag_leffler_integral(beta, x);
}

double stable_subordinator_density(double beta, double u) {
    if (!(beta > 0.0 && beta < 1.0)) {
        domain_fail("stable_subordinator_density: beta must lie in (0, 1), got " + std::to_string(beta));
    }
    if (std::isnan(u)) domain_fail("stable_subordinator_density: argument is NaN");
    if (u <= 0.0) return 0.0;
    if (std::isinf(u)) return 0.0;
    const double u_switch = std::pow(3.0, 1.0 / beta);
    if (u >= u_switch) return detail::subordinator_density_series(beta, u);
    return detail::subordinator_density_integral(beta, u);
}

double inverse_subordinator_density(double beta, double t, double x) {
    if (!(beta > 0.0 && beta < 1.0)) {
        domain_fail("inverse_subordinator_density: beta must lie in (0, 1), got " + std::to_string(beta));
    }
    if (!(t > 0.0) || !std::isfinite(t)) domain_fail("inverse_subordinator_density: t must be positive");
    if (x < 0.0) return 0.0;
    if (x == 0.0) return std::pow(t, -beta) / std::tgamma(1.0 - beta);  // f_{E_t}(0+) = t^{-beta} / Gamma(1 - beta)
    const double lx = std::log(x);
    const double u = std::exp(std::log(t) - lx / beta);
    const double g = stable_subordinator_density(beta, u);
    if (g == 0.0) return 0.0;
    return std::exp(std::log(t / beta) - (1.0 + 1.0 / beta) * lx + std::log(g));
}

namespace {

void check_time(const SampledFunction& g, double t) {
    if (!(t >= 0.0 && t <= g.t_max())) {
        domain_fail("time " + std::to_string(t) + " outside the sampled range [0, " + std::to_string(g.t_max()) + "]");
    }
}

// Visits the cells [a, b] of g restricted to [0, t] with the interpolated endpoint values.
template <class Visit>
void for_each_cell(const SampledFunction& g, double t, Visit&& visit) {
    const auto ts = g.times();
    const auto vs = g.values();
    for (std::size_t j = 0; j + 1 < ts.size() && ts[j] < t; ++j) {
        const double a = ts[j];
        double b = ts[j + 1];
        double gb = vs[j + 1];
        if (b > t) {
            gb = vs[j] + (t - a) / (b - a) * (vs[j + 1] - vs[j]);
            b = t;
        }
        visit(a, b, vs[j], gb);
    }
}

}  // namespace

double caputo_derivative(const SampledFunction& g, double beta, double t, CaputoScheme scheme) {
    if (!(beta > 0.0 && beta < 1.0)) domain_fail("caputo_derivative: beta must lie in (0, 1)");
    check_time(g, t);
    const double e = 1.0 - beta;
    const auto ts = g.times();
    const auto vs = g.values();
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < ts.size() && ts[j] < t; ++j) {
        const double a = ts[j];
        const double b = std::min(ts[j + 1], t);
        const double p = t - a;
        const double q = t - b;
        const double pe = std::pow(p, e);
        const double qe = std::pow(q, e);
        const double i0 = (pe - qe) / e;                                // int_a^b (t-s)^{-beta} ds
        if (scheme == CaputoScheme::linear || j == 0) {
            sum += (vs[j + 1] - vs[j]) / (ts[j + 1] - a) * i0;
            continue;
        }
        // q'(s) = d0 + d1 (s - a) for the quadratic through t_{j-1}, t_j, t_{j+1}
        const double x0 = ts[j - 1];
        const double x2 = ts[j + 1];
        const double s01 = (vs[j] - vs[j - 1]) / (a - x0);
        const double s12 = (vs[j + 1] - vs[j]) / (x2 - a);
        const double d1 = 2.0 * (s12 - s01) / (x2 - x0);
        const double d0 = s01 + 0.5 * d1 * (a - x0);
        const double i1 = p * i0 - (pe * p - qe * q) / (e + 1.0);     // int_a^b (t-s)^{-beta} (s-a) ds
        sum += d0 * i0 + d1 * i1;
    }
    return sum / std::tgamma(1.0 - beta);
}

double fractional_integral(const SampledFunction& g, double gamma, double t) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) domain_fail("fractional_integral: order gamma must be positive");
    check_time(g, t);
    double sum = 0.0;
    for_each_cell(g, t, [&](double a, double b, double ga, double gb) {
        const double p = t - a;
        const double q = t - b;
        const double h = b - a;
        const double pg = std::pow(p, gamma);
        const double qg = std::pow(q, gamma);
        const double i0 = (pg - qg) / gamma;                                 // int (t-s)^{g-1}
        const double i1 = p * i0 - (pg * p - qg * q) / (gamma + 1.0);       // int (t-s)^{g-1} (s-a)
        sum += ga * (i0 - i1 / h) + gb * (i1 / h);
    });
    return sum / std::tgamma(gamma);
}

SampledFunction fractional_integral(const SampledFunction& g, double gamma) {
    std::vector<double> times(g.times().begin(), g.times().end());
    std::vector<double> values(times.size());
    for (std::size_t j = 0; j < times.size(); ++j) values[j] = fractional_integral(g, gamma, times[j]);
    return SampledFunction(std::move(times), std::move(values));
}

}  // namespace fracstorm
