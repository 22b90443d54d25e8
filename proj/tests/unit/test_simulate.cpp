#include "doctest.h"

#include <cmath>

#include "fracstorm/kernels.hpp"
#include "fracstorm/moments.hpp"
#include "fracstorm/rng.hpp"
#include "fracstorm/simulate.hpp"

using namespace fracstorm;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::block(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::block(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("Philox normals have unit variance and streams are independent of each other") {
    Philox4x32 a(5, 0), b(5, 1);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = a.normal(), y = b.normal();
        s1 += x;
        s2 += x * x;
        cross += x * y;
    }
    CHECK(std::abs(s1 / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(cross / n) < 5.0 / std::sqrt(n));
}

TEST_CASE("sigma table: piecewise-linear interpolation and Lipschitz constant") {
    const SigmaFunction s = SigmaFunction::table({0.0, 1.0, 2.0}, {0.0, 2.0, 2.5});
    CHECK(s(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s(1.5) == doctest::Approx(2.25).epsilon(1e-15));
    CHECK(s(3.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(s.lipschitz() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(SigmaFunction::linear(1.5)(2.0) == 3.0);
}

namespace {
struct Setup {
    ModelParams params;
    EigenSystem es = make_eigen_system(2.0, 1.0, SpaceGrid(1.0, 24));
    Eigen::VectorXd u0 = Eigen::VectorXd::Ones(24);
    SimConfig cfg;
    Setup() {
        cfg.nx = 24;
        cfg.nt = 32;
        cfg.T = 0.2;
        cfg.replicates = 256;
        cfg.seed = 11;
    }
};
}  // namespace

TEST_CASE("Monte Carlo is bitwise reproducible across thread counts and agrees with the serial reference") {
    Setup s;
    s.cfg.threads = 1;
    const MomentEstimate a = simulate_mild(s.params, s.es, s.u0, s.cfg);
    s.cfg.threads = 3;
    const MomentEstimate b = simulate_mild(s.params, s.es, s.u0, s.cfg);
    const MomentEstimate c = simulate_mild_serial(s.params, s.es, s.u0, s.cfg);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    // the serial loop sums in a different order: same draws, rounding-level differences only
    CHECK((a.mean - c.mean).cwiseAbs().maxCoeff() < 1e-14 * a.mean.maxCoeff());
    s.cfg.seed = 12;
    CHECK(simulate_mild(s.params, s.es, s.u0, s.cfg).mean != a.mean);
}

TEST_CASE("Monte Carlo without noise reproduces the deterministic solution") {
    Setup s;
    s.params.lambda = 0.0;
    const MomentEstimate e = simulate_mild(s.params, s.es, s.u0, s.cfg);
    const Eigen::VectorXd g = apply_semigroup(s.es, 0.5, s.cfg.T, s.u0);
    for (int i = 0; i < 24; ++i) CHECK(std::abs(e.mean(s.cfg.nt, i) / (g(i) * g(i)) - 1.0) < 1e-10);
    CHECK(e.std_error.maxCoeff() == 0.0);
}

TEST_CASE("Monte Carlo agrees with the Volterra moment equation") {
    Setup s;
    s.cfg.replicates = 2000;
    const MomentEstimate e = simulate_mild(s.params, s.es, s.u0, s.cfg);
    const MomentField M = second_moment_white(s.params, s.es, s.u0, 1.0, s.cfg.T, s.cfg.nt);
    for (int i : {3, 8, 12, 17, 21}) {
        const double z = (e.mean(s.cfg.nt, i) - M.M(s.cfg.nt, i)) / e.std_error(s.cfg.nt, i);
        CHECK(std::abs(z) < 4.0);
    }
}

TEST_CASE("classical limit: the mild scheme coincides with Markovian stepping") {
    Setup s;
    s.params.beta = 1.0;
    s.cfg.replicates = 64;
    const MomentEstimate a = simulate_mild(s.params, s.es, s.u0, s.cfg);
    const MomentEstimate b = simulate_markov_reference(s.params, s.es, s.u0, s.cfg);
    CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() < 1e-10 * a.mean.maxCoeff());
}

TEST_CASE("Monte Carlo with colored noise is reproducible") {
    Setup s;
    s.params.noise = NoiseModel::riesz(0.5);
    s.cfg.replicates = 64;
    const MomentEstimate a = simulate_mild(s.params, s.es, s.u0, s.cfg);
    s.cfg.threads = 2;
    const MomentEstimate b = simulate_mild(s.params, s.es, s.u0, s.cfg);
    CHECK(a.mean == b.mean);
    CHECK(a.mean.allFinite());
    const MomentEstimate c = simulate_mild_serial(s.params, s.es, s.u0, s.cfg);
    CHECK((a.mean - c.mean).cwiseAbs().maxCoeff() < 1e-14 * a.mean.maxCoeff());
}
