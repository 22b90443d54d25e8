#pragma once

#include <Eigen/Dense>

#include "fracstorm/kernels.hpp"

namespace fracstorm {

/// Cell-pair averages of the Riesz kernel |y - z|^{-gamma} on a SpaceGrid and a PSD square root.
struct RieszCovariance {
    SpaceGrid grid;
    double gamma = 0.0;
    Eigen::MatrixXd C;       ///< C_jk = h^-2 int_{cell j} int_{cell k} |y - z|^{-gamma}
    Eigen::MatrixXd factor;  ///< symmetric square root: factor * factor^T = C
};

/// Exact cell-pair averages (including the singular diagonal) and their symmetric square root.
RieszCovariance build_riesz_covariance(const SpaceGrid& grid, double gamma);

/// Dimensionless cell average F(m) for cells m apart: C_jk = h^{-gamma} F(|j - k|).
double riesz_cell_average(double gamma, int m);

/// Constant F_gamma in the 1-d Fourier transform of |x|^{-gamma}: F_gamma |xi|^{gamma - 1}.
double riesz_fourier_constant(double gamma);

}  // namespace fracstorm
