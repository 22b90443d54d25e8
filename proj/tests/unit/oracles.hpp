#pragma once

// Reference values computed in the tests themselves, independent of the library code paths.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

/// e^{z^2} erfc(z), with the asymptotic expansion where the product would overflow.
inline double erfcx(double z) {
    if (z < 25.0) return std::exp(z * z) * std::erfc(z);
    const double w = 1.0 / (2.0 * z * z);
    return (1.0 - w + 3.0 * w * w - 15.0 * w * w * w) / (z * std::sqrt(std::numbers::pi));
}

/// E_{1/2}(x) = e^{x^2} erfc(-x).
inline double ml_half(double x) { return erfcx(-x); }

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Mittag-Leffler power series in long double (moderate |x| only).
inline double ml_series(double beta, double x) {
    long double sum = 0.0L;
    for (int k = 0; k < 400; ++k) {
        const long double term = std::pow(static_cast<long double>(x), k) / std::tgamma(1.0L + beta * k);
        sum += term;
        if (k > 10 && std::fabs(term) < 1e-22L * std::fabs(sum)) break;
    }
    return static_cast<double>(sum);
}

/// Levy density: the beta = 1/2 stable subordinator with Laplace transform exp(-sqrt(s)).
inline double levy_half(double u) {
    return std::exp(-1.0 / (4.0 * u)) / (2.0 * std::sqrt(std::numbers::pi) * std::pow(u, 1.5));
}

/// beta = 1/3 stable subordinator density through the modified Bessel function K_{1/3}.
inline double stable_third(double u) {
    return std::pow(u, -1.5) / (3.0 * std::numbers::pi) * std::cyl_bessel_k(1.0 / 3.0, 2.0 / std::sqrt(27.0 * u));
}

/// Gaussian heat kernel for E exp(i xi X_t) = exp(-nu t |xi|^2) in dimension d.
inline double heat(double nu, int d, double t, double r) {
    return std::exp(-r * r / (4.0 * nu * t)) / std::pow(4.0 * std::numbers::pi * nu * t, 0.5 * d);
}

}  // namespace oracle
