#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "fracstorm/kernels.hpp"

namespace fracstorm {

/// Spatial covariance seen by the sub-grid closure: white (gamma = 0) or Riesz(gamma).
struct SubgridModel {
    bool enabled = true;
    double gamma = 0.0;
};

/// int_{z0}^inf z^{p-1} E_beta(-z)^2 dz for every z0 (z0 >= 0, any order).
std::vector<double> ml_square_tail(double beta, double p, std::span<const double> z0);

/// Contribution of the modes above the grid cutoff |xi| > pi/h to the lag kernel:
/// white: int_{|xi|>pi/h} E_beta(-nu tau^beta |xi|^alpha)^2 dxi / (2 pi);
/// Riesz: the same integrand weighted by F_gamma |xi|^{gamma-1}.
std::vector<double> subgrid_kernel(double alpha, double beta, double nu, double h, double gamma,
                                   std::span<const double> tau);

/// Hat-weighted lag-cell integrals of products of mode decays for a uniform time step:
/// La[l](n,m) = int_{l dt}^{(l+1) dt} e_n e_m (tau - l dt)/dt dtau,
/// Lb[l](n,m) = int_{l dt}^{(l+1) dt} e_n e_m ((l+1) dt - tau)/dt dtau, e_n(tau) = E_beta(-mu_n tau^beta),
/// and the same weights applied to the sub-grid kernel (ka, kb).
struct LagTables {
    double dt = 0.0;
    int nlags = 0;
    std::vector<Eigen::MatrixXd> La;
    std::vector<Eigen::MatrixXd> Lb;
    std::vector<double> ka;
    std::vector<double> kb;
};

LagTables build_lag_tables(const EigenSystem& es, double beta, double dt, int nlags, const SubgridModel& sub);

/// Quadrature table for Laplace transforms of the lag kernel on (0, tau_max]:
/// L_nm(r) = int e^{-r tau} e_n(tau) e_m(tau) dtau on a log-spaced Gauss-Legendre grid.
struct LaplaceTable {
    std::vector<double> tau;
    std::vector<double> weight;  ///< includes the Jacobian tau of the log substitution
    Eigen::MatrixXd E;           ///< E(n, q) = e_n(tau_q)
    std::vector<double> ksub;    ///< sub-grid kernel at tau_q

    Eigen::MatrixXd transform(double r) const;
    Eigen::MatrixXd transform_derivative(double r) const;
    double ksub_transform(double r) const;
    double ksub_derivative(double r) const;
};

LaplaceTable build_laplace_table(const EigenSystem& es, double beta, double tau_max, const SubgridModel& sub);

}  // namespace fracstorm
