#include "doctest.h"

#include <cmath>

#include "fracstorm/excitation.hpp"
#include "fracstorm/kernels.hpp"

using namespace fracstorm;

TEST_CASE("theoretical excitation index") {
    CHECK(theoretical_index(2.0, 0.5, 1.0, NoiseModel::white()) == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
    CHECK(theoretical_index(2.0, 0.5, 0.5, NoiseModel::riesz(0.5)) == doctest::Approx(16.0 / 7.0).epsilon(1e-15));
    CHECK(theoretical_index(1.5, 0.5, 1.0, NoiseModel::white()) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(theoretical_index(2.0, 1.0, 1.0, NoiseModel::white()) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("geometric lambda grid") {
    const auto g = geometric_grid(1e2, 1e6, 5);
    REQUIRE(g.size() == 21);
    CHECK(g.front() == 1e2);
    CHECK(g.back() == doctest::Approx(1e6).epsilon(1e-14));
    for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] / g[k - 1] == doctest::Approx(std::pow(10.0, 0.2)).epsilon(1e-13));
    CHECK_THROWS_AS(geometric_grid(10.0, 1.0, 5), DomainError);
}

TEST_CASE("top-decade fit recovers an exact power law") {
    ExcitationFit fit;
    fit.lambdas = geometric_grid(1e2, 1e5, 5);
    for (double l : fit.lambdas) fit.log_values.push_back(0.3 * std::pow(l, 2.5));
    fit.log_stderr.assign(fit.lambdas.size(), 0.0);
    fit.theory = 2.5;
    fit.tolerance = 0.1;
    fit_top_decade(fit);
    CHECK(fit.slope == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(std::exp(fit.intercept) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(fit.fit_indices.size() == 6);
    CHECK(fit.pass);
}

TEST_CASE("top-decade fit rejects too few usable points") {
    ExcitationFit fit;
    fit.lambdas = {1.0, 2.0, 3.0};
    fit.log_values = {2.0, 3.0, 4.0};
    fit.log_stderr.assign(3, 0.0);
    CHECK_THROWS_AS(fit_top_decade(fit), FitError);
}

TEST_CASE("white-noise sweep on a coarse grid reproduces the index") {
    ModelParams p;
    const EigenSystem es = make_eigen_system(2.0, 1.0, SpaceGrid(1.0, 32));
    ExcitationOptions opt;
    opt.nt = 64;
    const ExcitationFit fit = excitation_sweep(p, es, Eigen::VectorXd::Ones(32), 0.1, geometric_grid(1e2, 1e5, 5), Backend::volterra, opt);
    CHECK(fit.theory == doctest::Approx(8.0 / 3.0));
    CHECK(std::abs(fit.slope / fit.theory - 1.0) < 0.1);
    CHECK(fit.verdict() == "PASS ±10%");
    for (std::size_t k = 1; k < fit.log_values.size(); ++k) CHECK(fit.log_values[k] > fit.log_values[k - 1]);
}
