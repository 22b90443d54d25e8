// fracstorm command-line front end: special functions, kernels, moment solvers, Monte Carlo,
// excitation sweeps and the validation suite.
//
// Exit codes: 0 success, 1 numerical failure (or failed validation), 2 invalid input.

#include <omp.h>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fracstorm/config.hpp"
#include "fracstorm/error.hpp"
#include "fracstorm/excitation.hpp"
#include "fracstorm/fracfun.hpp"
#include "fracstorm/io.hpp"
#include "fracstorm/kernels.hpp"
#include "fracstorm/moments.hpp"
#include "fracstorm/simulate.hpp"
#include "fracstorm/validation.hpp"

using namespace fracstorm;

namespace {

std::string num(double x) { return io::format_double(x); }

// Options shared by the config-driven commands.
struct RunArgs {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value
    int threads = -1;
    long long seed = -1;
    std::string output;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config_path, "key = value configuration file");
        app->add_option("-s,--set", overrides, "override one configuration key (key=value), repeatable");
        app->add_option("--seed", seed, "random seed (run.seed)");
        app->add_option("--output", output, "output directory (run.output)");
    }

    RunConfig load(int global_threads) const {
        RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) domain_fail("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (!output.empty()) cfg.output = output;
        if (global_threads > 0) cfg.threads = global_threads;
        cfg.validate();
        return cfg;
    }
};

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.output) / name).string();
}

EigenSystem eigen_for(const RunConfig& cfg) {
    return make_eigen_system(cfg.model.alpha, cfg.model.nu, SpaceGrid(cfg.model.R, cfg.n));
}

double linear_slope(const RunConfig& cfg, const char* who) {
    if (!cfg.sigma.is_linear()) domain_fail(std::string(who) + " requires a linear sigma (sigma.l)");
    return cfg.sigma.slope();
}

SimConfig sim_config(const RunConfig& cfg) {
    SimConfig s;
    s.nx = cfg.n;
    s.nt = cfg.nt;
    s.T = cfg.T;
    s.replicates = cfg.replicates;
    s.seed = cfg.seed;
    s.sigma = cfg.sigma;
    s.threads = cfg.threads;
    return s;
}

SampledFunction sample_test_function(const std::string& fn, double t_max, int n) {
    std::vector<double> t = graded_mesh(t_max, static_cast<std::size_t>(n));
    std::vector<double> v(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (fn == "1") {
            v[j] = 1.0;
        } else if (fn == "t") {
            v[j] = t[j];
        } else if (fn == "t2") {
            v[j] = t[j] * t[j];
        } else if (fn == "sin") {
            v[j] = std::sin(t[j]);
        } else {
            domain_fail("--fn must be one of 1, t, t2, sin");
        }
    }
    return SampledFunction(t, v);
}

void print_csv(const std::string& comment, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    io::CsvWriter csv(comment, header);
    for (const auto& r : rows) csv.row(r);
    std::cout << csv.str();
}

std::string version_comment(const std::string& what) { return std::string("fracstorm ") + FRACSTORM_VERSION + " " + what; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fracstorm: time-fractional stochastic heat equation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(FRACSTORM_VERSION));
    int threads = 0;
    app.add_option("-t,--threads", threads, "worker threads (default: FRACSTORM_THREADS, else OpenMP default)")
        ->check(CLI::NonNegativeNumber);

    // --- specfun ---------------------------------------------------------------------------------
    auto* specfun = app.add_subcommand("specfun", "special functions and fractional operators (CSV to stdout)");
    specfun->require_subcommand(1);
    double beta = 0.5;
    double gamma = 0.5;
    std::vector<double> xs;
    double t_arg = 1.0;
    std::string fn = "t";
    int samples = 512;

    auto* sf_ml = specfun->add_subcommand("ml", "Mittag-Leffler E_beta(x)");
    sf_ml->add_option("--beta", beta)->required();
    sf_ml->add_option("--x", xs, "argument(s)")->required();
    auto* sf_g = specfun->add_subcommand("gsub", "stable subordinator density g_beta(u)");
    sf_g->add_option("--beta", beta)->required();
    sf_g->add_option("--u", xs, "argument(s)")->required();
    auto* sf_f = specfun->add_subcommand("finv", "inverse subordinator density f_{E_t}(x)");
    sf_f->add_option("--beta", beta)->required();
    sf_f->add_option("--t", t_arg)->required();
    sf_f->add_option("--x", xs, "argument(s)")->required();
    auto* sf_c = specfun->add_subcommand("caputo", "Caputo derivative of a sampled test function");
    sf_c->add_option("--beta", beta)->required();
    sf_c->add_option("--t", t_arg)->required();
    sf_c->add_option("--fn", fn, "1 | t | t2 | sin");
    sf_c->add_option("--n", samples, "sample intervals on [0, t]");
    auto* sf_i = specfun->add_subcommand("fracint", "Riemann-Liouville integral of a sampled test function");
    sf_i->add_option("--gamma", gamma)->required();
    sf_i->add_option("--t", t_arg)->required();
    sf_i->add_option("--fn", fn, "1 | t | t2 | sin");
    sf_i->add_option("--n", samples, "sample intervals on [0, t]");

    // --- kernel ----------------------------------------------------------------------------------
    auto* kernel = app.add_subcommand("kernel", "heat kernels: Dirichlet matrix, free kernel, floor, C*");
    RunArgs kernel_args;
    kernel_args.attach(kernel);
    std::string kernel_what = "dirichlet";
    double kernel_t = 0.1;
    kernel->add_option("--what", kernel_what, "dirichlet | subordination | free | floor | cstar")
        ->check(CLI::IsMember({"dirichlet", "subordination", "free", "floor", "cstar"}));
    kernel->add_option("--time", kernel_t, "kernel time t");

    // --- moments ---------------------------------------------------------------------------------
    auto* moments = app.add_subcommand("moments", "second-moment Volterra solvers and renewal machinery");
    moments->require_subcommand(1);
    auto* mo_white = moments->add_subcommand("white", "white-noise second moment M(t, x)");
    auto* mo_col = moments->add_subcommand("colored", "Riesz-noise two-point function (diagonal written)");
    RunArgs mo_args;
    mo_args.attach(mo_white);
    mo_args.attach(mo_col);
    auto* mo_ren = moments->add_subcommand("renewal", "f = c1 + kappa int (t-s)^(rho-1) f(s) ds");
    double rho = 0.5;
    double kappa = 1.0;
    double c1 = 1.0;
    double ren_T = 1.0;
    int ren_nt = 256;
    mo_ren->add_option("--rho", rho)->required();
    mo_ren->add_option("--kappa", kappa)->required();
    mo_ren->add_option("--c1", c1);
    mo_ren->add_option("--T", ren_T)->required();
    mo_ren->add_option("--nt", ren_nt);
    auto* mo_series = moments->add_subcommand("series", "lower series S(theta) = sum (theta / k^rho)^k");
    std::vector<double> thetas;
    mo_series->add_option("--rho", rho)->required();
    mo_series->add_option("--theta", thetas)->required();

    // --- simulate --------------------------------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of E|u_t(x)|^2");
    RunArgs sim_args;
    sim_args.attach(simulate);
    std::string stream_path;
    simulate->add_option("--stream", stream_path, "write the raw ensemble as binary records");

    // --- excite ----------------------------------------------------------------------------------
    auto* excite = app.add_subcommand("excite", "lambda sweep and excitation-index fit");
    RunArgs ex_args;
    ex_args.attach(excite);
    bool no_svg = false;
    excite->add_flag("--no-svg", no_svg, "skip the SVG chart");

    // --- validate --------------------------------------------------------------------------------
    auto* validate = app.add_subcommand("validate", "property suites and acceptance criteria");
    std::vector<std::string> only;
    long long val_seed = 42;
    validate->add_option("--only", only, "suite names or check ids (e.g. kernels, acceptance.7)");
    validate->add_option("--seed", val_seed, "seed of every randomised check")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const int nthreads = resolve_threads(threads);
        if (nthreads > 0) omp_set_num_threads(nthreads);

        if (specfun->parsed()) {
            const std::string comment = version_comment("specfun");
            std::vector<std::vector<std::string>> rows;
            if (sf_ml->parsed()) {
                for (double x : xs) rows.push_back({num(beta), num(x), num(mittag_leffler(beta, x))});
                print_csv(comment, {"beta", "x", "E"}, rows);
            } else if (sf_g->parsed()) {
                if (!(beta > 0.0 && beta < 1.0)) domain_fail("0 < beta < 1 violated");
                for (double u : xs) rows.push_back({num(beta), num(u), num(stable_subordinator_density(beta, u))});
                print_csv(comment, {"beta", "u", "g"}, rows);
            } else if (sf_f->parsed()) {
                for (double x : xs)
                    rows.push_back({num(beta), num(t_arg), num(x), num(inverse_subordinator_density(beta, t_arg, x))});
                print_csv(comment, {"beta", "t", "x", "f"}, rows);
            } else if (sf_c->parsed()) {
                const SampledFunction g = sample_test_function(fn, t_arg, samples);
                const double v = caputo_derivative(g, beta, t_arg, CaputoScheme::quadratic);
                print_csv(comment, {"beta", "fn", "t", "caputo"}, {{num(beta), fn, num(t_arg), num(v)}});
            } else if (sf_i->parsed()) {
                const SampledFunction g = sample_test_function(fn, t_arg, samples);
                const double v = fractional_integral(g, gamma, t_arg);
                print_csv(comment, {"gamma", "fn", "t", "integral"}, {{num(gamma), fn, num(t_arg), num(v)}});
            }
            return 0;
        }

        if (kernel->parsed()) {
            const RunConfig cfg = kernel_args.load(nthreads);
            const double a = cfg.model.alpha;
            const double b = cfg.model.beta;
            if (kernel_what == "cstar") {
                print_csv(cfg.summary(), {"alpha", "beta", "nu", "d", "cstar"},
                          {{num(a), num(b), num(cfg.model.nu), std::to_string(cfg.model.d),
                            num(green_l2_constant(a, b, cfg.model.nu, cfg.model.d))}});
                return 0;
            }
            if (!(kernel_t > 0.0)) domain_fail("--time > 0 violated");
            const EigenSystem es = eigen_for(cfg);
            const SpaceGrid& g = es.grid;
            if (kernel_what == "floor") {
                const KernelFloor fl = kernel_floor(es, a, b, cfg.model.nu);
                io::CsvWriter csv(cfg.summary(), {"t", "min_scaled_kernel"});
                for (std::size_t k = 0; k < fl.times.size(); ++k) csv.row({num(fl.times[k]), num(fl.minima[k])});
                io::atomic_write(out_path(cfg, "kernel_floor.csv"), csv.str());
                std::printf("kernel floor: C = %.6g, t0 = %.6g (%s)\n", fl.C, fl.t0,
                            fl.C > 0.0 ? "floor found" : "no time passed the floor test");
                return 0;
            }
            if (kernel_what == "free") {
                io::CsvWriter csv(cfg.summary(), {"t", "x", "G_free"});
                for (int i = 0; i < g.n; ++i)
                    csv.row({num(kernel_t), num(g.nodes[i]),
                             num(fractional_free_kernel(a, b, cfg.model.nu, cfg.model.d, kernel_t, std::abs(g.nodes[i])))});
                io::atomic_write(out_path(cfg, "kernel_free.csv"), csv.str());
                std::printf("free kernel at t = %g written (%d points)\n", kernel_t, g.n);
                return 0;
            }
            const bool sub = kernel_what == "subordination";
            const Eigen::MatrixXd G = sub ? Eigen::MatrixXd() : dirichlet_kernel_matrix(es, b, kernel_t);
            io::CsvWriter csv(cfg.summary(), {"t", "x", "y", "G_B"});
            for (int i = 0; i < g.n; ++i)
                for (int j = 0; j < g.n; ++j)
                    csv.row({num(kernel_t), num(g.nodes[i]), num(g.nodes[j]),
                             num(sub ? dirichlet_kernel_subordination(es, b, kernel_t, i, j) : G(i, j))});
            io::atomic_write(out_path(cfg, sub ? "kernel_subordination.csv" : "kernel_dirichlet.csv"), csv.str());
            std::printf("Dirichlet kernel (%s) at t = %g written (%d x %d)\n", kernel_what.c_str(), kernel_t, g.n, g.n);
            return 0;
        }

        if (moments->parsed()) {
            if (mo_ren->parsed()) {
                const SampledFunction f = renewal_volterra_solve(c1, kappa, rho, ren_T, ren_nt);
                io::CsvWriter csv(version_comment("renewal rho=" + num(rho) + " kappa=" + num(kappa) + " c1=" + num(c1)),
                                  {"t", "f"});
                for (std::size_t j = 0; j < f.size(); ++j) csv.row({num(f.times()[j]), num(f.values()[j])});
                std::cout << csv.str();
                std::fprintf(stderr, "f(%g) = %.10g; growth scale (Gamma(rho) kappa)^(1/rho) = %.10g\n", ren_T,
                             f.values().back(), kappa > 0.0 ? renewal_growth_exponent(kappa, rho) : 0.0);
                return 0;
            }
            if (mo_series->parsed()) {
                std::vector<std::vector<std::string>> rows;
                for (double th : thetas)
                    rows.push_back({num(rho), num(th), num(log_lower_series(th, rho)), num(lower_series(th, rho))});
                print_csv(version_comment("series"), {"rho", "theta", "log_S", "S"}, rows);
                return 0;
            }
            const RunConfig cfg = mo_args.load(nthreads);
            const EigenSystem es = eigen_for(cfg);
            const Eigen::VectorXd u0 = make_initial_data(cfg.u0, es.grid);
            const double l = linear_slope(cfg, "the Volterra solver");
            MomentField M;
            if (mo_white->parsed()) {
                if (!cfg.model.noise.is_white()) domain_fail("moments white requires noise.kind = white");
                M = second_moment_white(cfg.model, es, u0, l, cfg.T, cfg.nt);
            } else {
                if (cfg.model.noise.is_white()) domain_fail("moments colored requires noise.kind = riesz");
                M = second_moment_colored(cfg.model, es, u0, l, cfg.model.noise.gamma, cfg.T, cfg.nt).diagonal();
            }
            io::atomic_write(out_path(cfg, "moments.csv"), io::moment_field_csv(M, cfg.summary()));
            const int j = static_cast<int>(M.times.size()) - 1;
            std::printf("moments (%s): log sup M(T) = %.10g, log int M(T) = %.10g, growth rate %.6g\n",
                        to_string(M.method).c_str(), M.log_sup(j), M.log_integral(j), M.growth_rate);
            return 0;
        }

        if (simulate->parsed()) {
            const RunConfig cfg = sim_args.load(nthreads);
            const EigenSystem es = eigen_for(cfg);
            const Eigen::VectorXd u0 = make_initial_data(cfg.u0, es.grid);
            SimConfig sc = sim_config(cfg);
            sc.stream_path = stream_path;
            const MomentEstimate est = simulate_mild(cfg.model, es, u0, sc);
            io::atomic_write(out_path(cfg, "simulate.csv"), io::moment_estimate_csv(est, cfg.summary()));
            const Eigen::Index last = est.mean.rows() - 1;
            std::printf("simulate: %d replicates used, %d blow-ups excluded; sup E|u_T|^2 = %.6g\n", est.replicates,
                        est.blowups, est.mean.row(last).maxCoeff());
            return 0;
        }

        if (excite->parsed()) {
            const RunConfig cfg = ex_args.load(nthreads);
            const EigenSystem es = eigen_for(cfg);
            const Eigen::VectorXd u0 = make_initial_data(cfg.u0, es.grid);
            ExcitationOptions opt;
            opt.functional = cfg.functional;
            opt.nt = cfg.nt;
            opt.threads = cfg.threads;
            opt.montecarlo = sim_config(cfg);
            if (cfg.backend == Backend::volterra) opt.l_sigma = linear_slope(cfg, "the volterra backend");
            const auto lambdas = geometric_grid(cfg.lambda_min, cfg.lambda_max, cfg.per_decade);
            const ExcitationFit fit = excitation_sweep(cfg.model, es, u0, cfg.t_eval, lambdas, cfg.backend, opt);
            io::atomic_write(out_path(cfg, "excitation.csv"), io::excitation_csv(fit, cfg.summary()));
            io::atomic_write(out_path(cfg, "excitation.json"), io::excitation_json(fit, cfg.summary(), cfg.seed));
            if (!no_svg) io::atomic_write(out_path(cfg, "excitation.svg"), io::excitation_svg(fit));
            std::printf("excite: slope %.4f, theory %.7f, %s\n", fit.slope, fit.theory, fit.verdict().c_str());
            return fit.pass ? 0 : 1;
        }

        if (validate->parsed()) {
            ValidationOptions vo;
            vo.only = only;
            vo.seed = static_cast<std::uint64_t>(val_seed);
            vo.threads = nthreads;
            const auto results = run_validation(vo, [](const CheckResult& r) {
                std::fprintf(stderr, "[%s] %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.id.c_str(), r.seconds);
            });
            std::cout << format_report(results);
            for (const auto& r : results)
                if (!r.pass) return 1;
            return 0;
        }
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
