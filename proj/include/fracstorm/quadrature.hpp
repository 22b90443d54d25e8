#pragma once

#include <functional>
#include <cstddef>
#include <span>

namespace fracstorm::quad {

using Integrand = std::function<double(double)>;

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    std::size_t max_segments = 4000;  ///< cap on the number of adaptive subintervals
};

/// Globally adaptive Gauss-Kronrod (31 points) on a finite interval.
double integrate(const Integrand& f, double a, double b, Options opt = {});

/// Adaptive Gauss-Kronrod over consecutive breakpoints; breaks must be increasing and finite.
double integrate_breaks(const Integrand& f, std::span<const double> breaks, Options opt = {});

/// Double-exponential rule on [a, b]; integrable endpoint singularities are fine.
double integrate_endpoint_singular(const Integrand& f, double a, double b, Options opt = {});

/// Integral over [a, inf). The integrand is mapped with x = a + u/(1-u) and
/// handled by adaptive Gauss-Kronrod.
double integrate_to_infinity(const Integrand& f, double a, Options opt = {});

/// Integral over (0, inf): double-exponential on (0, scale] plus the mapped
/// Gauss-Kronrod tail on [scale, inf).
double integrate_half_line(const Integrand& f, double scale, Options opt = {});

/// Fixed Gauss-Legendre nodes/weights on [-1, 1].
struct GaussRule {
    std::span<const double> nodes;
    std::span<const double> weights;
};
GaussRule gauss_legendre(int points);

}  // namespace fracstorm::quad
