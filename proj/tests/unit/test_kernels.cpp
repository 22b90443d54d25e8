#include "doctest.h"

#include <cmath>
#include <numbers>

#include "fracstorm/fracfun.hpp"
#include "fracstorm/kernels.hpp"
#include "fracstorm/riesz.hpp"
#include "oracles.hpp"

using namespace fracstorm;
using std::numbers::pi;

TEST_CASE("stable density: Gaussian and Cauchy closed forms") {
    for (int d : {1, 2, 3})
        for (double t : {0.3, 1.0})
            for (double r : {0.0, 0.5, 2.0}) CHECK(std::abs(stable_density(2.0, 1.0, d, t, r) / oracle::heat(1.0, d, t, r) - 1.0) < 1e-9);
    for (double t : {0.5, 2.0})
        for (double r : {0.0, 1.0, 10.0}) {
            CHECK(std::abs(stable_density(1.0, 1.0, 1, t, r) / (t / (pi * (t * t + r * r))) - 1.0) < 1e-8);
            CHECK(std::abs(stable_density(1.0, 1.0, 3, t, r) / (t / (pi * pi * std::pow(t * t + r * r, 2))) - 1.0) < 1e-8);
        }
}

TEST_CASE("stable density: self-similarity and two-sided power-law bounds") {
    const double a = 1.5;
    for (double t : {0.01, 0.3, 5.0})
        for (double r : {0.0, 0.2, 3.0}) {
            const double scaled = std::pow(t, -1.0 / a) * stable_density(a, 1.0, 1, 1.0, r * std::pow(t, -1.0 / a));
            CHECK(std::abs(stable_density(a, 1.0, 1, t, r) / scaled - 1.0) < 1e-8);
        }
    // Far field: p(1, r) ~ sin(pi a / 2) Gamma(1 + a) / pi * r^{-1-a}.
    const double r = 1000.0;
    const double far = std::sin(pi * a / 2.0) * std::tgamma(1.0 + a) / pi * std::pow(r, -1.0 - a);
    CHECK(std::abs(stable_density(a, 1.0, 1, 1.0, r) / far - 1.0) < 1e-3);
}

TEST_CASE("free fractional kernel equals the subordinated heat kernel") {
    // G_t(x) = int_0^inf p(s, x) f_{E_t}(s) ds with f_{E_t} the half-Gaussian law at beta = 1/2;
    // s = w^2 removes the endpoint singularity at x = 0.
    for (double t : {0.1, 1.0})
        for (double x : {0.0, 0.3, 1.5}) {
            const double ref = oracle::simpson(
                [&](double w) {
                    if (w == 0.0) return x == 0.0 ? 2.0 / std::sqrt(4.0 * pi) / std::sqrt(pi * t) : 0.0;
                    const double s = w * w;
                    return 2.0 * w * oracle::heat(1.0, 1, s, x) * std::exp(-s * s / (4.0 * t)) / std::sqrt(pi * t);
                },
                0.0, 8.0 * std::pow(t, 0.25), 40000);
            CHECK(std::abs(fractional_free_kernel(2.0, 0.5, 1.0, 1, t, x) / ref - 1.0) < 1e-7);
        }
}

TEST_CASE("L2 constant of the free kernel") {
    CHECK(std::abs(green_l2_constant(2.0, 1.0, 1.0, 1) - 1.0 / std::sqrt(8.0 * pi)) < 1e-10);
    // C* = nu^{-1/alpha} / (alpha pi) int_0^inf z^{1/alpha - 1} E_beta(-z)^2 dz in d = 1; z = w^2 at alpha = 2.
    const double integral = oracle::simpson([](double w) { return 2.0 * std::pow(oracle::erfcx(w * w), 2); }, 0.0, 60.0, 60000) +
                            2.0 / (pi * 3.0 * std::pow(60.0, 3));
    CHECK(std::abs(green_l2_constant(2.0, 0.5, 1.0, 1) / (integral / (2.0 * pi)) - 1.0) < 1e-6);
}

TEST_CASE("discrete generator: spectrum, symmetry and orthonormal modes") {
    const SpaceGrid g(1.0, 64);
    const Eigen::MatrixXd A = build_discrete_generator(2.0, 1.0, g);
    CHECK((A - A.transpose()).norm() == 0.0);
    const EigenSystem es = make_eigen_system(2.0, 1.0, g);
    CHECK(es.mu.minCoeff() > 0.0);
    CHECK(std::abs(es.mu(0) / (pi * pi / 4.0) - 1.0) < 1e-2);
    CHECK(std::abs(es.mu(1) / (pi * pi) - 1.0) < 1e-2);
    const Eigen::MatrixXd gram = g.h * es.phi.transpose() * es.phi;
    CHECK((gram - Eigen::MatrixXd::Identity(64, 64)).cwiseAbs().maxCoeff() < 1e-10);

    // Principal Dirichlet eigenvalue of (-Delta)^{1/2} on (-1, 1): 1.1577738836977.
    const EigenSystem e1 = make_eigen_system(1.0, 1.0, SpaceGrid(1.0, 128));
    CHECK(std::abs(e1.mu(0) / 1.1577738836977 - 1.0) < 1e-2);
}

TEST_CASE("Dirichlet kernel: classical semigroup property and symmetry") {
    const EigenSystem es = make_eigen_system(2.0, 1.0, SpaceGrid(1.0, 32));
    const double h = es.grid.h;
    const Eigen::MatrixXd G1 = dirichlet_kernel_matrix(es, 1.0, 0.05);
    const Eigen::MatrixXd G2 = dirichlet_kernel_matrix(es, 1.0, 0.1);
    CHECK((G1 * G1 * h - G2).cwiseAbs().maxCoeff() < 1e-10 * G2.maxCoeff());
    const Eigen::MatrixXd F = dirichlet_kernel_matrix(es, 0.5, 0.2);
    CHECK((F - F.transpose()).cwiseAbs().maxCoeff() < 1e-12 * F.maxCoeff());
    CHECK(F.minCoeff() >= 0.0);
}

TEST_CASE("Dirichlet kernel: spectral and subordination representations agree") {
    const EigenSystem es = make_eigen_system(2.0, 1.0, SpaceGrid(1.0, 24));
    for (double t : {0.02, 0.3})
        for (auto [i, j] : {std::pair{3, 3}, std::pair{5, 12}, std::pair{11, 12}}) {
            const double a = dirichlet_fractional_kernel(es, 0.5, t, i, j);
            const double b = dirichlet_kernel_subordination(es, 0.5, t, i, j);
            CHECK(std::abs(a / b - 1.0) < 1e-5);
        }
}

TEST_CASE("Dirichlet kernel lies below the free kernel") {
    const EigenSystem es = make_eigen_system(2.0, 1.0, SpaceGrid(1.0, 48));
    for (double t : {0.01, 0.1, 1.0}) {
        const Eigen::MatrixXd G = dirichlet_kernel_matrix(es, 0.5, t);
        for (int i = 0; i < 48; i += 5)
            for (int j = 0; j < 48; j += 3)
                CHECK(G(i, j) <= fractional_free_kernel(2.0, 0.5, 1.0, 1, t, std::abs(es.grid.nodes[i] - es.grid.nodes[j])) * 1.01);
    }
}

TEST_CASE("Riesz cell averages: closed form as a second difference") {
    for (double gamma : {0.3, 0.5, 0.8}) {
        const auto P = [&](double x) { return std::pow(std::abs(x), 2.0 - gamma) / ((1.0 - gamma) * (2.0 - gamma)); };
        for (int m : {0, 1, 2, 7, 40}) {
            const double ref = P(m + 1.0) - 2.0 * P(m) + P(m - 1.0);
            CHECK(std::abs(riesz_cell_average(gamma, m) / ref - 1.0) < 1e-10);
        }
    }
    const RieszCovariance cov = build_riesz_covariance(SpaceGrid(1.0, 16), 0.5);
    CHECK((cov.factor * cov.factor.transpose() - cov.C).cwiseAbs().maxCoeff() < 1e-10 * cov.C.maxCoeff());
}
