#pragma once

#include <string>

namespace fracstorm {

enum class NoiseKind { white, riesz };

/// Spatial covariance of the driving noise: white, or Riesz |x - y|^{-gamma}.
struct NoiseModel {
    NoiseKind kind = NoiseKind::white;
    double gamma = 0.0;  ///< Riesz exponent; unused for white noise

    static NoiseModel white() { return {}; }
    static NoiseModel riesz(double gamma) { return {NoiseKind::riesz, gamma}; }
    bool is_white() const { return kind == NoiseKind::white; }
    std::string name() const;

    bool operator==(const NoiseModel&) const = default;
};

/// Physical parameters of the time-fractional stochastic heat equation.
struct ModelParams {
    double alpha = 2.0;   ///< stability index in (0, 2]
    double beta = 0.5;    ///< Caputo order in (0, 1]; 1 is the classical limit
    double nu = 1.0;      ///< diffusivity
    int d = 1;            ///< spatial dimension in {1, 2, 3}
    double R = 1.0;       ///< radius of the ball B(0, R)
    double lambda = 1.0;  ///< noise level
    NoiseModel noise;

    bool classical() const { return beta == 1.0; }

    /// Throws DomainError quoting the first violated condition.
    void validate() const;

    bool operator==(const ModelParams&) const = default;
};

/// Checks 0 < alpha <= 2, 0 < beta <= 1, nu > 0 and d in {1,2,3}; shared by the kernel routines.
void validate_operator(double alpha, double beta, double nu, int d);

}  // namespace fracstorm
