#pragma once

#include <span>
#include <vector>

namespace fracstorm {

/// Order of a Caputo derivative / index of a stable subordinator.
/// Valid orders lie in (0, 1); the value 1 is accepted only where a routine
/// documents the classical (non-fractional) limit.
struct FracOrder {
    double beta;

    explicit FracOrder(double b);
    bool classical() const { return beta == 1.0; }
};

/// Samples of a function on [0, t_max], interpreted piecewise-linearly.
class SampledFunction {
public:
    SampledFunction(std::vector<double> times, std::vector<double> values);

    std::span<const double> times() const { return times_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return times_.size(); }
    double t_max() const { return times_.back(); }

    /// Linear interpolation; t must lie in [0, t_max].
    double operator()(double t) const;

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

/// Uniform (grading = 1) or graded mesh t_j = t_max (j/n)^grading, j = 0..n.
std::vector<double> graded_mesh(double t_max, std::size_t n, double grading = 1.0);

/// Mittag-Leffler function E_beta(x) = sum_k x^k / Gamma(1 + beta k), beta in (0, 1].
double mittag_leffler(double beta, double x);

/// Density of the beta-stable subordinator at time one (Laplace transform exp(-s^beta)).
double stable_subordinator_density(double beta, double u);

/// Density of the inverse subordinator E_t (first passage time of the subordinator).
double inverse_subordinator_density(double beta, double t, double x);

/// Interpolant used inside the Caputo product-integration rule.
enum class CaputoScheme {
    linear,     ///< piecewise-linear interpolant: exact for piecewise-linear g, O(h^{2-beta})
    quadratic,  ///< quadratic through (t_{j-1}, t_j, t_{j+1}) on cell j >= 1: exact for quadratics, O(h^{3-beta})
};

/// Caputo derivative of order beta in (0,1) at time t by product integration; the singular
/// weight (t-r)^{-beta} is integrated analytically on every cell.
double caputo_derivative(const SampledFunction& g, double beta, double t,
                         CaputoScheme scheme = CaputoScheme::linear);

/// Riemann-Liouville fractional integral of order gamma > 0 at time t, exact for the
/// piecewise-linear interpolant.
double fractional_integral(const SampledFunction& g, double gamma, double t);

/// Fractional integral evaluated at every sample time of g.
SampledFunction fractional_integral(const SampledFunction& g, double gamma);

namespace detail {
/// 1/Gamma(x), returning 0 at the poles.
double rgamma(double x);
double mittag_leffler_series(double beta, double x);
double mittag_leffler_integral(double beta, double x);
double mittag_leffler_asymptotic(double beta, double x);
double subordinator_density_series(double beta, double u);
double subordinator_density_integral(double beta, double u);
}  // namespace detail

}  // namespace fracstorm
