#include "doctest.h"

#include <cmath>
#include <numbers>

#include "fracstorm/kernels.hpp"
#include "fracstorm/moments.hpp"
#include "oracles.hpp"

using namespace fracstorm;

TEST_CASE("renewal equation: Gronwall equality case at rho = 1") {
    const SampledFunction f = renewal_volterra_solve(1.0, 2.0, 1.0, 3.0, 256);
    CHECK(std::abs(f.values().back() / std::exp(6.0) - 1.0) < 1e-6);
}

TEST_CASE("renewal equation: Mittag-Leffler resolvent at rho = 1/2") {
    // f(t) = c1 E_{1/2}(kappa Gamma(1/2) t^{1/2}).
    const double c1 = 0.7, kappa = 1.3;
    const SampledFunction f = renewal_volterra_solve(c1, kappa, 0.5, 2.0, 1024);
    double err = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double ref = c1 * oracle::ml_half(kappa * std::sqrt(std::numbers::pi * f.times()[j]));
        err = std::max(err, std::abs(f.values()[j] / ref - 1.0));
    }
    CHECK(err < 1e-5);
}

TEST_CASE("renewal growth scale") {
    CHECK(std::abs(renewal_growth_exponent(2.0, 1.0) - 2.0) < 1e-14);
    CHECK(std::abs(renewal_growth_exponent(1.0, 0.5) - std::numbers::pi) < 1e-12);
}

TEST_CASE("lower series: exact values and log-space agreement") {
    CHECK(std::abs(lower_series(1.0, 1.0) - 1.2912859970626636) < 1e-10);
    for (double theta : {0.5, 3.0, 20.0}) {
        long double s = 0.0L;
        for (int k = 1; k < 2000; ++k) s += std::pow(static_cast<long double>(theta) / std::pow(k, 0.75L), k);
        CHECK(std::abs(log_lower_series(theta, 0.75) - std::log(static_cast<double>(s))) < 1e-10);
    }
    // Growth like exp(c theta^{1/rho}): log log S / log theta approaches 1/rho from below.
    const double ratio = std::log(log_lower_series(1e6, 0.75)) / std::log(1e6);
    CHECK(ratio >= 1.0 / 0.75 - 0.15);
    CHECK(ratio <= 1.0 / 0.75);
}

namespace {
struct WhiteSetup {
    ModelParams params;
    EigenSystem es = make_eigen_system(2.0, 1.0, SpaceGrid(1.0, 32));
    Eigen::VectorXd u0 = Eigen::VectorXd::Ones(32);
};
}  // namespace

TEST_CASE("white-noise moment: zero noise gives the squared deterministic solution") {
    WhiteSetup s;
    s.params.lambda = 0.0;
    const MomentField M = second_moment_white(s.params, s.es, s.u0, 1.0, 0.2, 32);
    for (std::size_t j = 1; j < M.times.size(); j += 7) {
        const Eigen::VectorXd g = apply_semigroup(s.es, 0.5, M.times[j], s.u0);
        for (int i = 0; i < 32; ++i) CHECK(std::abs(M.M(static_cast<int>(j), i) / (g(i) * g(i)) - 1.0) < 1e-10);
    }
}

TEST_CASE("white-noise moment: monotone in the noise level and convergent in time") {
    WhiteSetup s;
    double prev = -1e300;
    for (double lambda : {0.5, 1.0, 2.0, 4.0}) {
        s.params.lambda = lambda;
        const MomentField M = second_moment_white(s.params, s.es, s.u0, 1.0, 0.2, 32);
        const double v = M.log_integral(static_cast<int>(M.times.size()) - 1);
        CHECK(v > prev);
        prev = v;
    }
    s.params.lambda = 2.0;
    const double coarse = second_moment_white(s.params, s.es, s.u0, 1.0, 0.2, 32).log_integral(32);
    const double fine = second_moment_white(s.params, s.es, s.u0, 1.0, 0.2, 64).log_integral(64);
    CHECK(std::abs(coarse - fine) < 1e-3);
}

TEST_CASE("white-noise moment: switches to renewal asymptotics at large noise") {
    WhiteSetup s;
    s.params.lambda = 1e4;
    const MomentField M = second_moment_white(s.params, s.es, s.u0, 1.0, 0.1, 64);
    CHECK(M.method == MomentMethod::renewal_asymptotic);
    CHECK(M.growth_rate > 0.0);
    CHECK(std::isfinite(M.log_sup(64)));
}

TEST_CASE("colored-noise moment: zero noise and symmetry of the two-point function") {
    ModelParams p;
    p.noise = NoiseModel::riesz(0.5);
    p.lambda = 0.0;
    const EigenSystem es = make_eigen_system(2.0, 1.0, SpaceGrid(1.0, 16));
    const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(16);
    const MomentField D = second_moment_colored(p, es, u0, 1.0, 0.5, 0.2, 16).diagonal();
    const Eigen::VectorXd g = apply_semigroup(es, 0.5, 0.2, u0);
    for (int i = 0; i < 16; ++i) CHECK(std::abs(D.M(16, i) / (g(i) * g(i)) - 1.0) < 1e-10);

    p.lambda = 3.0;
    const TwoPointField K = second_moment_colored(p, es, u0, 1.0, 0.5, 0.2, 16);
    const Eigen::MatrixXd& last = K.values.back();
    CHECK((last - last.transpose()).cwiseAbs().maxCoeff() < 1e-12 * last.maxCoeff());
}
