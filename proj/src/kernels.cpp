#include "fracstorm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fracstorm/error.hpp"
#include "fracstorm/fracfun.hpp"
#include "fracstorm/params.hpp"
#include "fracstorm/quadrature.hpp"
#include "fracstorm/riesz.hpp"

namespace fracstorm {

using std::numbers::pi;

SpaceGrid::SpaceGrid(double R_, int n_) : R(R_), n(n_) {
    if (!(R > 0.0) || !std::isfinite(R)) domain_fail("SpaceGrid: R > 0 violated");
    if (n < 2) domain_fail("SpaceGrid: at least two cells are required");
    h = 2.0 * R / n;
    nodes.resize(n);
    for (int i = 0; i < n; ++i) nodes[i] = -R + (i + 0.5) * h;
    // exact symmetry about the origin
    for (int i = 0; i < n / 2; ++i) {
        const double x = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
}

int SpaceGrid::nearest(double x) const {
    const int i = static_cast<int>(std::floor((x + R) / h));
    return std::clamp(i, 0, n - 1);
}

std::vector<int> SpaceGrid::interior(double radius) const {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
        if (std::abs(nodes[i]) < radius) idx.push_back(i);
    return idx;
}

// ---------------------------------------------------------------------------------------------
// stable densities

namespace detail {

double stable_density_origin(double alpha, int d) {
    const double sphere = 2.0 * std::pow(pi, d / 2.0) / std::tgamma(d / 2.0);
    return std::pow(2.0 * pi, -d) * sphere * std::tgamma(d / alpha) / alpha;
}

double stable_density_fourier(double alpha, int d, double rho) {
    if (rho == 0.0) return stable_density_origin(alpha, d);
    const double xi_max = std::pow(41.4, 1.0 / alpha);  // exp(-xi^alpha) < 1e-18 beyond
    auto f = [&](double xi) {
        const double damp = std::exp(-std::pow(xi, alpha));
        switch (d) {
            case 1: return std::cos(rho * xi) * damp / pi;
            case 2: return xi * std::cyl_bessel_j(0.0, rho * xi) * damp / (2.0 * pi);
            default: return xi * std::sin(rho * xi) * damp / (2.0 * pi * pi * rho);
        }
    };
    // panels: half-periods of the oscillation merged with a geometric grading towards xi = 0,
    // where exp(-xi^alpha) is not smooth
    std::vector<double> br;
    for (int k = -50; std::ldexp(1.0, k) < xi_max; ++k) br.push_back(std::ldexp(1.0, k));
    const double half = pi / rho;
    for (double x = half; x < xi_max; x += half) br.push_back(x);
    br.push_back(xi_max);
    std::sort(br.begin(), br.end());
    const auto rule = quad::gauss_legendre(24);
    double sum = 0.0;
    double a = 0.0;
    for (double b : br) {
        if (b - a < 1e-14 * b) continue;
        const double c = 0.5 * (a + b);
        const double w = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) s += rule.weights[q] * f(c + w * rule.nodes[q]);
        sum += w * s;
        a = b;
    }
    return sum;
}

// p_d(rho) = pi^{-d/2-1} sum_{k>=1} (-1)^{k+1}/k! Gamma(alpha k/2 + 1) Gamma((alpha k + d)/2)
//            sin(pi alpha k / 2) 2^{alpha k} rho^{-alpha k - d}
// convergent for alpha < 1, asymptotic (optimally truncated) for alpha > 1.
double stable_density_tail_series(double alpha, int d, double rho) {
    const double lr = std::log(rho);
    double sum = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 4000; ++k) {
        const double ak = alpha * k;
        const double lenv = std::lgamma(ak / 2.0 + 1.0) + std::lgamma((ak + d) / 2.0) - std::lgamma(k + 1.0) +
                            ak * std::log(2.0) - (ak + d) * lr;
        const double env = std::exp(lenv);
        if (alpha > 1.0 && env > prev) break;
        prev = env;
        const double term = ((k % 2 == 1) ? 1.0 : -1.0) * std::sin(pi * ak / 2.0) * env;
        sum += term;
        if (k > 2 && env < 1e-18 * std::abs(sum)) break;
    }
    return sum / std::pow(pi, d / 2.0 + 1.0);
}

}  // namespace detail

namespace {

double standard_stable_density(double alpha, int d, double rho) {
    if (alpha == 2.0) return std::pow(4.0 * pi, -d / 2.0) * std::exp(-rho * rho / 4.0);
    if (alpha == 1.0) {
        return std::tgamma((d + 1) / 2.0) / std::pow(pi, (d + 1) / 2.0) * std::pow(1.0 + rho * rho, -(d + 1) / 2.0);
    }
    if (rho == 0.0) return detail::stable_density_origin(alpha, d);
    const bool tail = (alpha > 1.0 && rho >= 15.0) || (alpha < 1.0 && rho >= 4.0);
    if (tail) return detail::stable_density_tail_series(alpha, d, rho);
    return detail::stable_density_fourier(alpha, d, rho);
}

}  // namespace

double stable_density(double alpha, double nu, int d, double t, double r) {
    validate_operator(alpha, 1.0, nu, d);
    if (!(t > 0.0) || !std::isfinite(t)) domain_fail("stable_density: t > 0 violated");
    if (!std::isfinite(r)) domain_fail("stable_density: distance must be finite");
    const double scale = std::pow(nu * t, 1.0 / alpha);
    return standard_stable_density(alpha, d, std::abs(r) / scale) / std::pow(scale, d);
}

double fractional_free_kernel(double alpha, double beta, double nu, int d, double t, double r) {
    validate_operator(alpha, beta, nu, d);
    if (!(t > 0.0) || !std::isfinite(t)) domain_fail("fractional_free_kernel: t > 0 violated");
    r = std::abs(r);
    if (beta == 1.0) return stable_density(alpha, nu, d, t, r);
    const double tb = std::pow(t, beta);
    const double ratio = static_cast<double>(d) / alpha;
    if (r == 0.0 && ratio >= 1.0) return std::numeric_limits<double>::infinity();

    // G_t(r) = int_0^inf p(t^beta v, r) f_{E_1}(v) dv with v = e^y
    auto f = [&](double y) {
        const double v = std::exp(y);
        const double fe = inverse_subordinator_density(beta, 1.0, v);
        if (fe == 0.0) return 0.0;
        return stable_density(alpha, nu, d, tb * v, r) * fe * v;
    };
    double v_hi = 1.0;
    const double f0 = 1.0 / std::tgamma(1.0 - beta);
    while (inverse_subordinator_density(beta, 1.0, v_hi) * v_hi > 1e-20 * f0) v_hi *= 1.5;
    double y_lo;
    if (r > 0.0) {
        y_lo = std::log(std::pow(r, alpha) / (nu * tb)) - 25.0;
        if (ratio < 1.0) y_lo = std::max(y_lo, -40.0 / (1.0 - ratio));
    } else {
        y_lo = -40.0 / (1.0 - ratio);
    }
    const double y_hi = std::log(v_hi);
    std::vector<double> br{y_lo};
    for (double y = std::ceil(y_lo); y < y_hi; y += 1.0)
        if (y > br.back()) br.push_back(y);
    if (r > 0.0) {
        const double y_bump = std::log(std::pow(r, alpha) / (nu * tb));
        if (y_bump > y_lo && y_bump < y_hi) br.push_back(y_bump);
    }
    br.push_back(y_hi);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    return quad::integrate_breaks(f, br, {.rel_tol = 1e-10, .abs_tol = 0.0});
}

double green_l2_constant(double alpha, double beta, double nu, int d) {
    validate_operator(alpha, beta, nu, d);
    const double ratio = static_cast<double>(d) / alpha;
    if (!(ratio < 2.0)) {
        domain_fail("green_l2_constant: d < 2 alpha violated (the L2 integral diverges)");
    }
    const double pref = std::pow(nu, -ratio) * 2.0 * std::pow(pi, d / 2.0) / (alpha * std::tgamma(d / 2.0)) *
                        std::pow(2.0 * pi, -d);
    // int_0^inf z^{d/alpha - 1} E_beta(-z)^2 dz, in y = log z up to Z, analytic tail beyond
    auto f = [&](double y) {
        const double z = std::exp(y);
        const double e = mittag_leffler(beta, -z);
        return std::exp(ratio * y) * e * e;
    };
    const double y_lo = -40.0 / ratio;
    const double y_hi = beta == 1.0 ? std::log(60.0) : std::log(1e6);
    std::vector<double> br;
    for (double y = y_lo; y < y_hi; y += 1.0) br.push_back(y);
    br.push_back(y_hi);
    double integral = quad::integrate_breaks(f, br, {.rel_tol = 1e-12, .abs_tol = 0.0});
    if (beta < 1.0) {
        // E_beta(-z) = sum_k c_k z^{-k}, c_k = (-1)^{k+1}/Gamma(1 - beta k); square and integrate termwise
        const double Z = std::exp(y_hi);
        double c[6];
        for (int k = 1; k <= 5; ++k) c[k] = ((k % 2 == 1) ? 1.0 : -1.0) * detail::rgamma(1.0 - beta * k);
        for (int j = 1; j <= 5; ++j)
            for (int k = 1; k <= 5; ++k) {
                const double m = j + k;
                integral += c[j] * c[k] * std::pow(Z, ratio - m) / (m - ratio);
            }
    }
    return pref * integral;
}

// ---------------------------------------------------------------------------------------------
// discrete generator and spectrum

Eigen::MatrixXd build_discrete_generator(double alpha, double nu, const SpaceGrid& grid) {
    validate_operator(alpha, 1.0, nu, 1);
    if (grid.n < 8) domain_fail("build_discrete_generator: grid.n >= 8 required");
    const int n = grid.n;
    const double h = grid.h;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    if (alpha == 2.0) {
        // three-point Laplacian; the boundary lies half a cell outside the first/last node
        // (antisymmetric ghost value), which puts 3 on the corner diagonal entries
        const double s = nu / (h * h);
        for (int i = 0; i < n; ++i) {
            A(i, i) = 2.0 * s;
            if (i > 0) A(i, i - 1) = -s;
            if (i + 1 < n) A(i, i + 1) = -s;
        }
        A(0, 0) = 3.0 * s;
        A(n - 1, n - 1) = 3.0 * s;
        return A;
    }
    // (-Delta)^{alpha/2} u(x) = C_alpha int_0^inf (2u(x) - u(x+z) - u(x-z)) z^{-1-alpha} dz.
    // [0, h]: second difference times int z^{1-alpha}; [kh, (k+1)h]: piecewise-linear
    // interpolation of the second difference with analytic weights; zero exterior data.
    const double c_alpha = alpha * std::pow(2.0, alpha - 1.0) * std::tgamma((1.0 + alpha) / 2.0) /
                           (std::sqrt(pi) * std::tgamma(1.0 - alpha / 2.0));
    const double ha = std::pow(h, -alpha);
    auto weights = [&](int k, double& a_k, double& b_k) {
        const double kk = k;
        const double i0 = (std::pow(kk, -alpha) - std::pow(kk + 1.0, -alpha)) / alpha;
        const double i1 = alpha == 1.0 ? std::log((kk + 1.0) / kk)
                                       : (std::pow(kk + 1.0, 1.0 - alpha) - std::pow(kk, 1.0 - alpha)) / (1.0 - alpha);
        a_k = ha * ((kk + 1.0) * i0 - i1);
        b_k = ha * (i1 - kk * i0);
    };
    std::vector<double> c(n, 0.0);
    double a_prev = 0.0;
    double b_prev = 0.0;
    for (int k = 1; k < n; ++k) {
        double a_k = 0.0;
        double b_k = 0.0;
        weights(k, a_k, b_k);
        c[k] = a_k + (k == 1 ? ha / (2.0 - alpha) : b_prev);
        a_prev = a_k;
        b_prev = b_k;
    }
    (void)a_prev;
    const double diag = 2.0 * ha * (1.0 / (2.0 - alpha) + 1.0 / alpha);
    for (int i = 0; i < n; ++i) {
        A(i, i) = nu * c_alpha * diag;
        for (int j = 0; j < n; ++j)
            if (j != i) A(i, j) = -nu * c_alpha * c[std::abs(i - j)];
    }
    return A;
}

EigenSystem eigen_system(const Eigen::MatrixXd& A, const SpaceGrid& grid) {
    if (A.rows() != grid.n || A.cols() != grid.n) domain_fail("eigen_system: matrix does not match the grid");
    if (!A.isApprox(A.transpose(), 0.0) && (A - A.transpose()).cwiseAbs().maxCoeff() > 0.0) {
        domain_fail("eigen_system: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
    if (solver.info() != Eigen::Success) numerical_fail("eigen_system: symmetric eigendecomposition failed");
    EigenSystem es;
    es.grid = grid;
    es.mu = solver.eigenvalues();
    if (!(es.mu[0] > 0.0)) numerical_fail("eigen_system: operator is not positive definite");
    es.phi = solver.eigenvectors() / std::sqrt(grid.h);
    for (int k = 0; k < es.phi.cols(); ++k) {
        Eigen::Index imax = 0;
        es.phi.col(k).cwiseAbs().maxCoeff(&imax);
        if (es.phi(imax, k) < 0.0) es.phi.col(k) *= -1.0;
    }
    return es;
}

EigenSystem make_eigen_system(double alpha, double nu, const SpaceGrid& grid) {
    EigenSystem es = eigen_system(build_discrete_generator(alpha, nu, grid), grid);
    es.alpha = alpha;
    es.nu = nu;
    return es;
}

// ---------------------------------------------------------------------------------------------
// Dirichlet kernels

namespace {

void check_beta_t(double beta, double t) {
    if (!(beta > 0.0 && beta <= 1.0)) domain_fail("0 < beta <= 1 violated (beta=" + std::to_string(beta) + ")");
    if (!(t > 0.0) || !std::isfinite(t)) domain_fail("kernel time t > 0 violated");
}

void check_node(const EigenSystem& es, int i) {
    if (i < 0 || i >= es.size()) domain_fail("grid node index out of range");
}

int mode_count(const EigenSystem& es, int N) {
    if (N < 0) return es.size();
    if (N > es.size()) domain_fail("truncation N exceeds the number of modes");
    return N;
}

}  // namespace

Eigen::VectorXd mode_decay(const EigenSystem& es, double beta, double t) {
    check_beta_t(beta, t);
    Eigen::VectorXd e(es.size());
    const double tb = std::pow(t, beta);
    for (int k = 0; k < es.size(); ++k) e[k] = beta == 1.0 ? std::exp(-es.mu[k] * t) : mittag_leffler(beta, -es.mu[k] * tb);
    return e;
}

double dirichlet_fractional_kernel(const EigenSystem& es, double beta, double t, int i, int j, int N) {
    check_node(es, i);
    check_node(es, j);
    const int m = mode_count(es, N);
    const Eigen::VectorXd e = mode_decay(es, beta, t);
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += e[k] * es.phi(i, k) * es.phi(j, k);
    if (s < 0.0 && s > -1e-12) s = 0.0;
    return s;
}

Eigen::MatrixXd dirichlet_kernel_matrix(const EigenSystem& es, double beta, double t, int N) {
    const int m = mode_count(es, N);
    const Eigen::VectorXd e = mode_decay(es, beta, t).head(m);
    const auto P = es.phi.leftCols(m);
    Eigen::MatrixXd G = P * e.asDiagonal() * P.transpose();
    G = 0.5 * (G + G.transpose()).eval();
    for (Eigen::Index q = 0; q < G.size(); ++q)
        if (G.data()[q] < 0.0 && G.data()[q] > -1e-12) G.data()[q] = 0.0;
    return G;
}

double killed_kernel(const EigenSystem& es, double s, int i, int j) {
    check_node(es, i);
    check_node(es, j);
    if (!(s >= 0.0)) domain_fail("killed_kernel: s >= 0 violated");
    double sum = 0.0;
    for (int k = 0; k < es.size(); ++k) sum += std::exp(-es.mu[k] * s) * es.phi(i, k) * es.phi(j, k);
    return sum;
}

double dirichlet_kernel_subordination(const EigenSystem& es, double beta, double t, int i, int j) {
    check_beta_t(beta, t);
    check_node(es, i);
    check_node(es, j);
    if (beta == 1.0) return killed_kernel(es, t, i, j);
    const double tb = std::pow(t, beta);
    const int n = es.size();
    Eigen::VectorXd w(n);
    for (int k = 0; k < n; ++k) w[k] = es.phi(i, k) * es.phi(j, k);
    // int_0^inf p_B(t^beta v) f_{E_1}(v) dv, v = e^y
    auto f = [&](double y) {
        const double v = std::exp(y);
        const double fe = inverse_subordinator_density(beta, 1.0, v);
        if (fe == 0.0) return 0.0;
        double p = 0.0;
        for (int k = 0; k < n; ++k) p += std::exp(-es.mu[k] * tb * v) * w[k];
        return p * fe * v;
    };
    const double f0 = 1.0 / std::tgamma(1.0 - beta);
    double v_hi = 1.0;
    while (inverse_subordinator_density(beta, 1.0, v_hi) * v_hi > 1e-20 * f0 &&
           es.mu[0] * tb * v_hi < 50.0)
        v_hi *= 1.5;
    const double y_hi = std::log(v_hi);
    const double y_lo = std::log(std::min(1.0, 1.0 / (es.mu[n - 1] * tb))) - 37.0;
    std::vector<double> br;
    for (double y = y_lo; y < y_hi; y += 1.0) br.push_back(y);
    br.push_back(y_hi);
    return quad::integrate_breaks(f, br, {.rel_tol = 1e-11, .abs_tol = 0.0});
}

Eigen::VectorXd apply_semigroup(const EigenSystem& es, double beta, double t, const Eigen::VectorXd& u0) {
    if (u0.size() != es.size()) domain_fail("apply_semigroup: u0 does not match the grid");
    const Eigen::VectorXd e = mode_decay(es, beta, t);
    const Eigen::VectorXd coef = es.grid.h * (es.phi.transpose() * u0);
    return es.phi * e.cwiseProduct(coef);
}

Eigen::MatrixXd colored_kernel_matrix(const EigenSystem& es, double beta, double gamma, double t) {
    if (!(gamma > 0.0 && gamma < 1.0) || (es.alpha > 0.0 && !(gamma < es.alpha))) {
        domain_fail("colored_kernel_convolution: 0 < gamma < min(alpha, 1) violated (gamma=" + std::to_string(gamma) + ")");
    }
    const RieszCovariance rc = build_riesz_covariance(es.grid, gamma);
    const Eigen::MatrixXd G = dirichlet_kernel_matrix(es, beta, t);
    const double h = es.grid.h;
    Eigen::MatrixXd K = h * h * (G * rc.C * G);
    return 0.5 * (K + K.transpose());
}

double colored_kernel_convolution(const EigenSystem& es, double beta, double gamma, double t, int i, int j) {
    check_node(es, i);
    check_node(es, j);
    return colored_kernel_matrix(es, beta, gamma, t)(i, j);
}

KernelFloor kernel_floor(const EigenSystem& es, double alpha, double beta, double nu, double interior_fraction) {
    if (!(interior_fraction > 0.0 && interior_fraction < 1.0)) domain_fail("kernel_floor: interior fraction in (0,1) violated");
    KernelFloor out;
    out.reference = 0.5 * fractional_free_kernel(alpha, beta, nu, 1, 1.0, 1.0);
    const auto inner = es.grid.interior(interior_fraction * es.grid.R);
    const double h = es.grid.h;
    bool found = false;
    double cmin = std::numeric_limits<double>::infinity();
    for (int k = 6; k >= -60; --k) {
        const double t = std::ldexp(1.0, k);
        const double reach = std::pow(t, beta / alpha);
        if (reach < 2.0 * h) break;  // near-diagonal set no longer resolved by the grid
        const Eigen::MatrixXd G = dirichlet_kernel_matrix(es, beta, t);
        double m = std::numeric_limits<double>::infinity();
        for (int i : inner)
            for (int j : inner)
                if (std::abs(es.grid.nodes[i] - es.grid.nodes[j]) < reach) m = std::min(m, G(i, j) * reach);
        out.times.push_back(t);
        out.minima.push_back(m);
        if (!found && m >= out.reference) {
            found = true;
            out.t0 = t;
        }
        if (found) cmin = std::min(cmin, m);
    }
    out.C = found ? cmin : 0.0;
    return out;
}

}  // namespace fracstorm
