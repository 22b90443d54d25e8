#pragma once

#include <Eigen/Dense>
#include <vector>

namespace fracstorm {

/// Cell-centred grid on (-R, R): x_i = -R + (i + 1/2) h, h = 2R / n.
struct SpaceGrid {
    double R = 1.0;
    int n = 0;
    double h = 0.0;
    std::vector<double> nodes;

    SpaceGrid() = default;
    SpaceGrid(double R, int n);

    /// Index of the node closest to x (clamped to the grid).
    int nearest(double x) const;
    /// Indices i with |x_i| < radius.
    std::vector<int> interior(double radius) const;
};

/// Spectrum of the discretised killed generator. phi(:, k) is the k-th eigenfunction sampled on
/// the grid and normalised so that h * sum_i phi(i,k) phi(i,m) = delta_km.
struct EigenSystem {
    SpaceGrid grid;
    double alpha = 0.0;   ///< stability index of the discretised operator (0 if unknown)
    double nu = 0.0;      ///< diffusivity of the discretised operator (0 if unknown)
    Eigen::VectorXd mu;   ///< ascending, all > 0
    Eigen::MatrixXd phi;  ///< n x n

    int size() const { return static_cast<int>(mu.size()); }
};

/// Density p(t, x) of the isotropic alpha-stable process with E exp(i xi.X_t) = exp(-t nu |xi|^alpha),
/// evaluated at radial distance r = |x| in dimension d.
double stable_density(double alpha, double nu, int d, double t, double r);

/// Free-space time-fractional kernel G_t(x) = int_0^inf p(s, x) f_{E_t}(s) ds at r = |x|.
/// beta = 1 returns the stable density itself.
double fractional_free_kernel(double alpha, double beta, double nu, int d, double t, double r);

/// C* with int G_t(x)^2 dx = C* t^{-beta d / alpha}.
double green_l2_constant(double alpha, double beta, double nu, int d);

/// Symmetric positive-definite discretisation of nu (-Delta)^{alpha/2} on (-R, R) with zero
/// exterior data (d = 1).
Eigen::MatrixXd build_discrete_generator(double alpha, double nu, const SpaceGrid& grid);

/// Full symmetric eigendecomposition with h-weighted normalisation and a deterministic sign
/// convention (the largest-magnitude entry of every eigenvector is positive).
EigenSystem eigen_system(const Eigen::MatrixXd& A, const SpaceGrid& grid);

/// Convenience: build_discrete_generator followed by eigen_system.
EigenSystem make_eigen_system(double alpha, double nu, const SpaceGrid& grid);

/// E_beta(-mu_k t^beta) for all modes (exp(-mu_k t) when beta = 1).
Eigen::VectorXd mode_decay(const EigenSystem& es, double beta, double t);

/// G_B(t, x_i, x_j) = sum_{k < N} E_beta(-mu_k t^beta) phi_k(x_i) phi_k(x_j); N < 0 means all modes.
/// Negative truncation artefacts smaller than 1e-12 in magnitude are reported as 0.
double dirichlet_fractional_kernel(const EigenSystem& es, double beta, double t, int i, int j, int N = -1);

/// The whole matrix [G_B(t, x_i, x_j)]_{ij}.
Eigen::MatrixXd dirichlet_kernel_matrix(const EigenSystem& es, double beta, double t, int N = -1);

/// Killed (classical-time) kernel p_B(s, x_i, x_j) = sum_k exp(-mu_k s) phi_k(x_i) phi_k(x_j).
double killed_kernel(const EigenSystem& es, double s, int i, int j);

/// G_B via subordination: int_0^inf p_B(s, x_i, x_j) f_{E_t}(s) ds by adaptive quadrature.
double dirichlet_kernel_subordination(const EigenSystem& es, double beta, double t, int i, int j);

/// (G_B u0)_t on the grid via the eigen-expansion.
Eigen::VectorXd apply_semigroup(const EigenSystem& es, double beta, double t, const Eigen::VectorXd& u0);

/// int int G_B(t, x_i, w) G_B(t, x_j, z) |w - z|^{-gamma} dw dz with the cell-averaged Riesz matrix.
double colored_kernel_convolution(const EigenSystem& es, double beta, double gamma, double t, int i, int j);

/// All pairs of colored_kernel_convolution: h^2 G C G.
Eigen::MatrixXd colored_kernel_matrix(const EigenSystem& es, double beta, double gamma, double t);

/// Result of the near-diagonal positivity-floor search for G_B.
struct KernelFloor {
    double t0 = 0.0;  ///< largest dyadic time at which the floor still holds
    double C = 0.0;   ///< min over the tested times of min G_B t^{beta d / alpha}
    double reference = 0.0;  ///< the floor level used to accept a time (half the free kernel at unit scaled distance)
    std::vector<double> times;   ///< tested times (descending)
    std::vector<double> minima;  ///< min_{pairs} G_B(t) t^{beta d / alpha} per tested time
};

/// Empirical t0 and floor constant C for G_B(t,x,y) >= C t^{-beta/alpha} on
/// {|x - y| < t^{beta/alpha}, |x|, |y| < interior_fraction R}.
KernelFloor kernel_floor(const EigenSystem& es, double alpha, double beta, double nu, double interior_fraction = 0.75);

namespace detail {
/// Standard density p_1 at radius rho (nu = t = 1) by radial Fourier inversion.
double stable_density_fourier(double alpha, int d, double rho);
/// Large-rho series for the standard density.
double stable_density_tail_series(double alpha, int d, double rho);
/// Standard density at the origin.
double stable_density_origin(double alpha, int d);
}  // namespace detail

}  // namespace fracstorm
