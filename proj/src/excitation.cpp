#include "fracstorm/excitation.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>

namespace fracstorm {

std::string to_string(Functional f) { return f == Functional::energy ? "energy" : "sup"; }
std::string to_string(Backend b) { return b == Backend::volterra ? "volterra" : "montecarlo"; }

double theoretical_index(double alpha, double beta, double d_or_gamma, const NoiseModel& noise) {
    const double denom = alpha - d_or_gamma * beta;
    if (!(denom > 0.0)) {
        domain_fail(noise.is_white() ? "alpha - d beta > 0 violated (nonpositive denominator of 2α/(α−dβ))"
                                     : "alpha - gamma beta > 0 violated (nonpositive denominator of 2α/(α−γβ))");
    }
    return 2.0 * alpha / denom;
}

std::vector<double> geometric_grid(double lo, double hi, int per_decade) {
    if (!(lo > 0.0) || !(hi > lo) || per_decade < 1) domain_fail("geometric_grid: 0 < lo < hi and per_decade >= 1 required");
    const double decades = std::log10(hi / lo);
    const int n = static_cast<int>(std::lround(decades * per_decade));
    std::vector<double> g(std::max(n, 1) + 1);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (g.size() - 1));
    g.back() = hi;
    return g;
}

std::string ExcitationFit::verdict() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s ±%g%%", pass ? "PASS" : "FAIL", std::round(tolerance * 1000.0) / 10.0);
    return buf;
}

void fit_top_decade(ExcitationFit& fit) {
    const std::size_t n = fit.lambdas.size();
    if (n != fit.log_values.size()) domain_fail("fit_top_decade: lambdas and values differ in length");
    if (n < 2) throw FitError("excitation fit: fewer than two λ values");
    const double top = *std::max_element(fit.lambdas.begin(), fit.lambdas.end());
    const double bottom = *std::min_element(fit.lambdas.begin(), fit.lambdas.end());
    if (!(top > bottom)) throw FitError("excitation fit: degenerate λ grid (all values equal)");
    fit.fit_indices.clear();
    for (std::size_t i = 0; i < n; ++i) {
        if (fit.lambdas[i] < top / 10.0 * (1.0 - 1e-12)) continue;
        // log log E needs E > 1; other points are dropped from the window
        if (!(fit.log_values[i] > 0.0) || !std::isfinite(fit.log_values[i])) continue;
        fit.fit_indices.push_back(static_cast<int>(i));
    }
    if (fit.fit_indices.size() < 4)
        throw FitError("excitation fit: fewer than 4 usable points (E_t > 1) in the top decade");
    double sx = 0.0;
    double sy = 0.0;
    const double m = static_cast<double>(fit.fit_indices.size());
    for (int i : fit.fit_indices) {
        sx += std::log(fit.lambdas[i]);
        sy += std::log(fit.log_values[i]);
    }
    const double mx = sx / m;
    const double my = sy / m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (int i : fit.fit_indices) {
        const double dx = std::log(fit.lambdas[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(fit.log_values[i]) - my);
    }
    if (!(sxx > 0.0)) throw FitError("excitation fit: degenerate λ values in the fit window");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.residuals.clear();
    for (int i : fit.fit_indices)
        fit.residuals.push_back(std::log(fit.log_values[i]) - (fit.intercept + fit.slope * std::log(fit.lambdas[i])));
    if (!std::isfinite(fit.slope)) throw FitError("excitation fit: non-finite slope");
    fit.pass = fit.theory > 0.0 && std::abs(fit.slope / fit.theory - 1.0) <= fit.tolerance;
}

namespace {

double functional_of(const MomentField& M, int j, Functional f) {
    return f == Functional::energy ? 0.5 * M.log_integral(j) : M.log_sup(j);
}

MomentField volterra_field(const ModelParams& p, const EigenSystem& es, const Eigen::VectorXd& u0, double t,
                           const ExcitationOptions& opt) {
    if (p.noise.is_white()) return second_moment_white(p, es, u0, opt.l_sigma, t, opt.nt, opt.volterra);
    return second_moment_colored(p, es, u0, opt.l_sigma, p.noise.gamma, t, opt.nt, opt.volterra).diagonal();
}

// Runs body(i) for every λ index concurrently, rethrowing the first failure.
template <class F>
void for_each_lambda(std::size_t n, int threads, F body) {
    std::vector<std::exception_ptr> errors(n);
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
    for (int i = 0; i < static_cast<int>(n); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void check_sweep(const ModelParams& params, double t, const std::vector<double>& lambdas) {
    params.validate();
    if (!(t > 0.0)) domain_fail("excitation sweep: t > 0 required");
    if (lambdas.empty()) domain_fail("excitation sweep: empty λ grid");
    for (double l : lambdas)
        if (!(l >= 0.0) || !std::isfinite(l)) domain_fail("excitation sweep: λ values must be finite and >= 0");
}

}  // namespace

ExcitationFit excitation_sweep(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0, double t,
                               const std::vector<double>& lambdas, Backend backend, const ExcitationOptions& opt) {
    check_sweep(params, t, lambdas);
    ExcitationFit fit;
    fit.lambdas = lambdas;
    fit.functional = opt.functional;
    fit.backend = backend;
    fit.t = t;
    fit.theory = params.noise.is_white() ? theoretical_index(params.alpha, params.beta, params.d, params.noise)
                                         : theoretical_index(params.alpha, params.beta, params.noise.gamma, params.noise);
    fit.tolerance = opt.tolerance >= 0.0 ? opt.tolerance : (params.noise.is_white() ? 0.10 : 0.12);
    const std::size_t n = lambdas.size();
    fit.log_values.assign(n, 0.0);
    fit.log_stderr.assign(n, 0.0);
    fit.methods.assign(n, "");
    fit.growth_rates.assign(n, 0.0);

    if (backend == Backend::volterra) {
        for_each_lambda(n, opt.threads, [&](std::size_t i) {
            ModelParams p = params;
            p.lambda = lambdas[i];
            const MomentField M = volterra_field(p, es, u0, t, opt);
            const int j = static_cast<int>(M.times.size()) - 1;
            fit.log_values[i] = functional_of(M, j, opt.functional);
            fit.methods[i] = to_string(M.method);
            fit.growth_rates[i] = M.growth_rate;
        });
    } else {
        // the Monte Carlo runs parallelise internally over replicate blocks
        for (std::size_t i = 0; i < n; ++i) {
            ModelParams p = params;
            p.lambda = lambdas[i];
            SimConfig cfg = opt.montecarlo;
            cfg.T = t;
            cfg.nx = es.size();
            if (cfg.threads == 0) cfg.threads = opt.threads;
            const MomentEstimate est = simulate_mild(p, es, u0, cfg);
            const Eigen::VectorXd m = est.mean.row(est.mean.rows() - 1).transpose();
            const Eigen::VectorXd se = est.std_error.row(est.std_error.rows() - 1).transpose();
            if (opt.functional == Functional::energy) {
                const double total = m.sum() * es.grid.h;
                fit.log_values[i] = 0.5 * std::log(total);
                fit.log_stderr[i] = 0.5 * se.sum() * es.grid.h / total;  // bound: errors fully correlated
            } else {
                Eigen::Index imax = 0;
                const double top = m.maxCoeff(&imax);
                fit.log_values[i] = std::log(top);
                fit.log_stderr[i] = se[imax] / top;
            }
            fit.methods[i] = "montecarlo";
        }
    }
    fit_top_decade(fit);
    return fit;
}

PositionReport index_vs_position_check(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0,
                                       double t, double epsilon, const std::vector<double>& lambdas,
                                       const ExcitationOptions& opt) {
    check_sweep(params, t, lambdas);
    const double R = es.grid.R;
    if (!(epsilon > 0.0 && epsilon < R)) domain_fail("index_vs_position_check: epsilon must lie in (0, R)");
    PositionReport rep;
    const double reach = R - epsilon;
    std::vector<int> probe_nodes;
    const std::vector<int> inner = es.grid.interior(reach);
    if (inner.size() <= 1) {
        probe_nodes.push_back(es.grid.nearest(0.0));
    } else {
        // 5 probes evenly spread (by index) over the nodes of B(0, R - epsilon), ends included
        const std::size_t count = std::min<std::size_t>(5, inner.size());
        for (std::size_t k = 0; k < count; ++k) {
            const int i = inner[(k * (inner.size() - 1)) / (count - 1)];
            if (std::find(probe_nodes.begin(), probe_nodes.end(), i) == probe_nodes.end()) probe_nodes.push_back(i);
        }
    }
    const std::size_t n = lambdas.size();
    const std::size_t P = probe_nodes.size();
    std::vector<std::vector<double>> pointwise(P, std::vector<double>(n, 0.0));
    std::vector<double> energy(n, 0.0);
    for_each_lambda(n, opt.threads, [&](std::size_t i) {
        ModelParams p = params;
        p.lambda = lambdas[i];
        const MomentField M = volterra_field(p, es, u0, t, opt);
        const int j = static_cast<int>(M.times.size()) - 1;
        energy[i] = 0.5 * M.log_integral(j);
        for (std::size_t k = 0; k < P; ++k) pointwise[k][i] = M.log_M(j, probe_nodes[k]);
    });
    auto slope_of = [&](const std::vector<double>& values) {
        ExcitationFit f;
        f.lambdas = lambdas;
        f.log_values = values;
        fit_top_decade(f);
        return f.slope;
    };
    rep.energy_slope = slope_of(energy);
    rep.theory = params.noise.is_white() ? theoretical_index(params.alpha, params.beta, params.d, params.noise)
                                         : theoretical_index(params.alpha, params.beta, params.noise.gamma, params.noise);
    int center = 0;
    for (std::size_t k = 0; k < P; ++k) {
        rep.probes.push_back(es.grid.nodes[probe_nodes[k]]);
        rep.slopes.push_back(slope_of(pointwise[k]));
        if (std::abs(rep.probes[k]) < std::abs(rep.probes[center])) center = static_cast<int>(k);
    }
    const auto [lo, hi] = std::minmax_element(rep.slopes.begin(), rep.slopes.end());
    rep.max_deviation = *hi - *lo;
    rep.center_vs_energy = std::abs(rep.slopes[center] - rep.energy_slope);
    return rep;
}

}  // namespace fracstorm
