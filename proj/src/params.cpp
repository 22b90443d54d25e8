#include "fracstorm/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fracstorm/error.hpp"

namespace fracstorm {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

}  // namespace

std::string NoiseModel::name() const {
    return is_white() ? "white" : fmt("riesz(gamma=%g)", gamma);
}

void validate_operator(double alpha, double beta, double nu, int d) {
    if (!(alpha > 0.0 && alpha <= 2.0)) domain_fail(fmt("0 < alpha <= 2 violated (alpha=%g)", alpha));
    if (!(beta > 0.0 && beta <= 1.0)) domain_fail(fmt("0 < beta <= 1 violated (beta=%g)", beta));
    if (!(nu > 0.0) || !std::isfinite(nu)) domain_fail(fmt("nu > 0 violated (nu=%g)", nu));
    if (d < 1 || d > 3) domain_fail(fmt("d in {1,2,3} violated (d=%g)", d));
}

void ModelParams::validate() const {
    validate_operator(alpha, beta, nu, d);
    if (!(R > 0.0) || !std::isfinite(R)) domain_fail(fmt("R > 0 violated (R=%g)", R));
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) domain_fail(fmt("lambda >= 0 violated (lambda=%g)", lambda));
    if (noise.is_white()) {
        const double bound = std::min(2.0, 1.0 / beta) * alpha;
        if (!(d < bound)) {
            domain_fail(fmt("d < (2∧1/β)·α violated (d=%g, alpha=%g, beta=%g)", d, alpha, beta));
        }
    } else {
        const double g = noise.gamma;
        if (!(g > 0.0 && g < std::min(alpha, static_cast<double>(d)))) {
            domain_fail(fmt("0 < γ < min(α, d) violated (gamma=%g, alpha=%g, d=%g)", g, alpha, d));
        }
    }
}

}  // namespace fracstorm
