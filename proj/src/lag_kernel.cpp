#include "fracstorm/lag_kernel.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fracstorm/error.hpp"
#include "fracstorm/fracfun.hpp"
#include "fracstorm/quadrature.hpp"
#include "fracstorm/riesz.hpp"

namespace fracstorm {

using std::numbers::pi;

namespace {

double mode_value(double beta, double mu, double tau) {
    return beta == 1.0 ? std::exp(-mu * tau) : mittag_leffler(beta, -mu * std::pow(tau, beta));
}

// int_Z^inf z^{p-1} E_beta(-z)^2 dz from the asymptotic expansion E = sum_k c_k z^{-k}
double asymptotic_tail(double beta, double p, double Z) {
    double c[7];
    for (int k = 1; k <= 6; ++k) c[k] = ((k % 2 == 1) ? 1.0 : -1.0) * detail::rgamma(1.0 - beta * k);
    double s = 0.0;
    for (int j = 1; j <= 6; ++j)
        for (int k = 1; k <= 6; ++k) {
            const double m = j + k;
            s += c[j] * c[k] * std::pow(Z, p - m) / (m - p);
        }
    return s;
}

}  // namespace

std::vector<double> ml_square_tail(double beta, double p, std::span<const double> z0) {
    if (!(p > 0.0 && p < 2.0)) domain_fail("ml_square_tail: exponent p must lie in (0, 2)");
    std::vector<double> out(z0.size(), 0.0);
    if (beta == 1.0) {
        for (std::size_t i = 0; i < z0.size(); ++i)
            out[i] = std::pow(2.0, -p) * (z0[i] <= 0.0 ? std::tgamma(p) : boost::math::tgamma(p, 2.0 * z0[i]));
        return out;
    }
    const double Z = 1e6;
    auto f = [&](double y) {
        const double z = std::exp(y);
        const double e = mittag_leffler(beta, -z);
        return std::exp(p * y) * e * e;
    };
    // accumulate from the top (z = Z) downwards through the sorted z0 values, in y = log z
    std::vector<std::size_t> order(z0.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return z0[a] > z0[b]; });
    double acc = asymptotic_tail(beta, p, Z);
    double y_cur = std::log(Z);
    const double y_floor = -40.0 / p;  // below, z^p < e^-40
    auto advance = [&](double y_new) {
        if (y_new >= y_cur) return;
        std::vector<double> br{y_new};
        for (double y = std::ceil(y_new); y < y_cur; y += 1.0)
            if (y > br.back()) br.push_back(y);
        br.push_back(y_cur);
        acc += quad::integrate_breaks(f, br, {.rel_tol = 1e-11, .abs_tol = 0.0});
        y_cur = y_new;
    };
    for (std::size_t idx : order) {
        const double z = z0[idx];
        if (z >= Z) {
            out[idx] = asymptotic_tail(beta, p, z);
            continue;
        }
        advance(z > 0.0 ? std::max(std::log(z), y_floor) : y_floor);
        out[idx] = acc;
    }
    return out;
}

std::vector<double> subgrid_kernel(double alpha, double beta, double nu, double h, double gamma,
                                   std::span<const double> tau) {
    const double p = (gamma > 0.0 ? gamma : 1.0) / alpha;
    std::vector<double> z0(tau.size());
    const double cut = std::pow(pi / h, alpha);
    for (std::size_t i = 0; i < tau.size(); ++i) z0[i] = nu * std::pow(tau[i], beta) * cut;
    std::vector<double> J = ml_square_tail(beta, p, z0);
    const double weight = gamma > 0.0 ? riesz_fourier_constant(gamma) : 1.0;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        const double s = nu * std::pow(tau[i], beta);
        J[i] *= weight * std::pow(s, -p) / (pi * alpha);
    }
    return J;
}

LagTables build_lag_tables(const EigenSystem& es, double beta, double dt, int nlags, const SubgridModel& sub) {
    if (!(dt > 0.0) || nlags < 1) domain_fail("build_lag_tables: dt > 0 and nlags >= 1 required");
    if (sub.enabled && !(es.alpha > 0.0)) domain_fail("build_lag_tables: eigen system lacks alpha/nu for the sub-grid closure");
    const int n = es.size();
    LagTables lt;
    lt.dt = dt;
    lt.nlags = nlags;
    lt.La.assign(nlags, Eigen::MatrixXd::Zero(n, n));
    lt.Lb.assign(nlags, Eigen::MatrixXd::Zero(n, n));
    lt.ka.assign(nlags, 0.0);
    lt.kb.assign(nlags, 0.0);

    // nodes and weights per lag cell; cell 0 uses tau = dt e^{-y} (composite, 40 unit panels)
    // to resolve the fast decay of high modes near tau = 0.
    const auto gl = quad::gauss_legendre(8);
    for (int l = 0; l < nlags; ++l) {
        std::vector<double> tau;
        std::vector<double> w;
        if (l == 0) {
            for (int panel = 0; panel < 40; ++panel)
                for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                    const double y = panel + 0.5 * (gl.nodes[q] + 1.0);
                    const double t = dt * std::exp(-y);
                    tau.push_back(t);
                    w.push_back(0.5 * gl.weights[q] * t);
                }
        } else {
            for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                tau.push_back(dt * (l + 0.5 * (gl.nodes[q] + 1.0)));
                w.push_back(0.5 * dt * gl.weights[q]);
            }
        }
        const int nq = static_cast<int>(tau.size());
        Eigen::MatrixXd E(n, nq);
        for (int k = 0; k < n; ++k)
            for (int q = 0; q < nq; ++q) E(k, q) = mode_value(beta, es.mu[k], tau[q]);
        Eigen::VectorXd wa(nq);
        Eigen::VectorXd wb(nq);
        for (int q = 0; q < nq; ++q) {
            const double s = (tau[q] - l * dt) / dt;
            wa[q] = w[q] * s;
            wb[q] = w[q] * (1.0 - s);
        }
        lt.La[l] = E * wa.asDiagonal() * E.transpose();
        lt.Lb[l] = E * wb.asDiagonal() * E.transpose();
        if (sub.enabled) {
            const auto ks = subgrid_kernel(es.alpha, beta, es.nu, es.grid.h, sub.gamma, tau);
            for (int q = 0; q < nq; ++q) {
                lt.ka[l] += wa[q] * ks[q];
                lt.kb[l] += wb[q] * ks[q];
            }
        }
    }
    return lt;
}

LaplaceTable build_laplace_table(const EigenSystem& es, double beta, double tau_max, const SubgridModel& sub) {
    if (!(tau_max > 0.0)) domain_fail("build_laplace_table: tau_max > 0 required");
    LaplaceTable t;
    const auto gl = quad::gauss_legendre(5);
    const double y_lo = std::log(1e-30);
    const double y_hi = std::log(tau_max);
    const double width = 0.25;
    const int panels = static_cast<int>(std::ceil((y_hi - y_lo) / width));
    const double wpan = (y_hi - y_lo) / panels;
    for (int p = 0; p < panels; ++p)
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            const double y = y_lo + wpan * (p + 0.5 * (gl.nodes[q] + 1.0));
            const double tau = std::exp(y);
            t.tau.push_back(tau);
            t.weight.push_back(0.5 * wpan * gl.weights[q] * tau);
        }
    const int n = es.size();
    const int nq = static_cast<int>(t.tau.size());
    t.E.resize(n, nq);
    for (int k = 0; k < n; ++k)
        for (int q = 0; q < nq; ++q) t.E(k, q) = mode_value(beta, es.mu[k], t.tau[q]);
    if (sub.enabled) {
        t.ksub = subgrid_kernel(es.alpha, beta, es.nu, es.grid.h, sub.gamma, t.tau);
    } else {
        t.ksub.assign(nq, 0.0);
    }
    return t;
}

Eigen::MatrixXd LaplaceTable::transform(double r) const {
    Eigen::VectorXd w(tau.size());
    for (std::size_t q = 0; q < tau.size(); ++q) w[q] = weight[q] * std::exp(-r * tau[q]);
    return E * w.asDiagonal() * E.transpose();
}

Eigen::MatrixXd LaplaceTable::transform_derivative(double r) const {
    Eigen::VectorXd w(tau.size());
    for (std::size_t q = 0; q < tau.size(); ++q) w[q] = -weight[q] * tau[q] * std::exp(-r * tau[q]);
    return E * w.asDiagonal() * E.transpose();
}

double LaplaceTable::ksub_transform(double r) const {
    double s = 0.0;
    for (std::size_t q = 0; q < tau.size(); ++q) s += weight[q] * std::exp(-r * tau[q]) * ksub[q];
    return s;
}

double LaplaceTable::ksub_derivative(double r) const {
    double s = 0.0;
    for (std::size_t q = 0; q < tau.size(); ++q) s -= weight[q] * tau[q] * std::exp(-r * tau[q]) * ksub[q];
    return s;
}

}  // namespace fracstorm
