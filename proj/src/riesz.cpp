#include "fracstorm/riesz.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fracstorm/error.hpp"

namespace fracstorm {

double riesz_cell_average(double gamma, int m) {
    // second difference of |u|^{2-gamma} / ((1-gamma)(2-gamma)) at u = m
    m = std::abs(m);
    const double e = 2.0 - gamma;
    const double den = (1.0 - gamma) * (2.0 - gamma);
    const double mm = static_cast<double>(m);
    return (std::pow(mm + 1.0, e) - 2.0 * std::pow(mm, e) + std::pow(std::abs(mm - 1.0), e)) / den;
}

double riesz_fourier_constant(double gamma) {
    return 2.0 * std::tgamma(1.0 - gamma) * std::sin(std::numbers::pi * gamma / 2.0);
}

RieszCovariance build_riesz_covariance(const SpaceGrid& grid, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        domain_fail("build_riesz_covariance: 0 < gamma < 1 violated (gamma=" + std::to_string(gamma) + ")");
    }
    require(grid.n >= 2, "build_riesz_covariance: grid needs at least two cells");
    const int n = grid.n;
    const double scale = std::pow(grid.h, -gamma);
    Eigen::VectorXd row(n);
    for (int m = 0; m < n; ++m) row[m] = scale * riesz_cell_average(gamma, m);
    RieszCovariance rc;
    rc.grid = grid;
    rc.gamma = gamma;
    rc.C.resize(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) rc.C(j, k) = row[std::abs(j - k)];

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rc.C);
    if (es.info() != Eigen::Success) numerical_fail("build_riesz_covariance: eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    const double norm = ev.cwiseAbs().maxCoeff();
    for (int k = 0; k < n; ++k) {
        if (ev[k] < -1e-10 * norm) numerical_fail("build_riesz_covariance: covariance is not positive semidefinite");
        ev[k] = std::sqrt(std::max(ev[k], 0.0));
    }
    rc.factor = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    return rc;
}

}  // namespace fracstorm
