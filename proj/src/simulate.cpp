#include "fracstorm/simulate.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fracstorm/error.hpp"

namespace fracstorm {

// --- sigma -------------------------------------------------------------------------------------------

SigmaFunction SigmaFunction::linear(double l) {
    if (!std::isfinite(l)) domain_fail("sigma: the linear coefficient must be finite");
    SigmaFunction f;
    f.l_ = l;
    return f;
}

SigmaFunction SigmaFunction::table(std::vector<double> u, std::vector<double> s) {
    if (u.size() != s.size() || u.size() < 2) domain_fail("sigma table: need at least two (u, sigma) pairs");
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!std::isfinite(u[i]) || !std::isfinite(s[i])) domain_fail("sigma table: entries must be finite");
        if (i > 0 && !(u[i] > u[i - 1])) domain_fail("sigma table: u values must be strictly increasing");
    }
    SigmaFunction f;
    f.u_ = std::move(u);
    f.s_ = std::move(s);
    f.l_ = 0.0;
    if (std::abs(f(0.0)) > 1e-14 * std::max(1.0, f.lipschitz())) domain_fail("sigma table: sigma(0) = 0 violated");
    return f;
}

double SigmaFunction::operator()(double u) const {
    if (u_.empty()) return l_ * u;
    std::size_t i = static_cast<std::size_t>(std::upper_bound(u_.begin(), u_.end(), u) - u_.begin());
    i = std::clamp<std::size_t>(i, 1, u_.size() - 1);
    const double w = (u - u_[i - 1]) / (u_[i] - u_[i - 1]);
    return s_[i - 1] + w * (s_[i] - s_[i - 1]);
}

double SigmaFunction::lipschitz() const {
    if (u_.empty()) return std::abs(l_);
    double L = 0.0;
    for (std::size_t i = 1; i < u_.size(); ++i) L = std::max(L, std::abs((s_[i] - s_[i - 1]) / (u_[i] - u_[i - 1])));
    return L;
}

std::string SigmaFunction::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (u_.empty()) {
        os << "linear(" << l_ << ")";
    } else {
        os << "table(";
        for (std::size_t i = 0; i < u_.size(); ++i) os << (i ? ";" : "") << u_[i] << ":" << s_[i];
        os << ")";
    }
    return os.str();
}

void SimConfig::validate() const {
    if (nx < 8) domain_fail("simulate: nx >= 8 required");
    if (nt < 1) domain_fail("simulate: nt >= 1 required");
    if (!(T > 0.0)) domain_fail("simulate: T > 0 required");
    if (replicates < 2) domain_fail("simulate: replicates >= 2 required (standard error undefined otherwise)");
    if (threads < 0) domain_fail("simulate: threads must be nonnegative");
    if (!(blowup_guard > 0.0)) domain_fail("simulate: blow-up guard must be positive");
    if (static_cast<double>(nt) * nx * nx > 1e8) domain_fail("simulate: nt * nx^2 exceeds the kernel-table memory guard 1e8");
}

// --- noise ------------------------------------------------------------------------------------------

Eigen::VectorXd sample_noise_slice(const NoiseModel& noise, const RieszCovariance* cov, const SpaceGrid& grid,
                                   double dt, Philox4x32& rng) {
    if (!(dt > 0.0)) domain_fail("sample_noise_slice: dt > 0 required");
    Eigen::VectorXd xi(grid.n);
    for (int i = 0; i < grid.n; ++i) xi[i] = rng.normal();
    if (noise.is_white()) return xi * std::sqrt(dt * grid.h);
    if (cov == nullptr || cov->C.rows() != grid.n) domain_fail("sample_noise_slice: Riesz covariance missing for the grid");
    return (cov->factor * xi) * (std::sqrt(dt) * grid.h);
}

namespace {

struct Setup {
    double dt = 0.0;
    std::vector<Eigen::VectorXd> g;          // deterministic part at t_n
    std::vector<Eigen::MatrixXd> K;          // G_B((l + 1/2) dt), l = 0..nt-1
    std::optional<RieszCovariance> cov;
};

Setup prepare(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0, const SimConfig& cfg,
              bool kernels) {
    params.validate();
    cfg.validate();
    if (params.d != 1) domain_fail("simulate: d = 1 only");
    if (es.size() != cfg.nx) domain_fail("simulate: nx must match the eigen-system grid");
    if (u0.size() != cfg.nx || !u0.allFinite()) domain_fail("simulate: u0 must be finite and sampled on the grid");
    Setup s;
    s.dt = cfg.T / cfg.nt;
    s.g.resize(cfg.nt + 1);
    s.g[0] = u0;
    for (int n = 1; n <= cfg.nt; ++n) s.g[n] = apply_semigroup(es, params.beta, n * s.dt, u0);
    if (kernels) {
        s.K.resize(cfg.nt);
        for (int l = 0; l < cfg.nt; ++l) s.K[l] = dirichlet_kernel_matrix(es, params.beta, (l + 0.5) * s.dt);
    }
    if (!params.noise.is_white()) s.cov = build_riesz_covariance(es.grid, params.noise.gamma);
    return s;
}

// Running mean / M2 of u^2 per (time, node).
struct Stats {
    long count = 0;
    Eigen::MatrixXd mean;
    Eigen::MatrixXd m2;

    Stats(int rows, int cols) : mean(Eigen::MatrixXd::Zero(rows, cols)), m2(Eigen::MatrixXd::Zero(rows, cols)) {}

    void add(const Eigen::MatrixXd& x) {  // Welford
        ++count;
        const Eigen::MatrixXd delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta.cwiseProduct(x - mean);
    }
};

Stats merge(const Stats& a, const Stats& b) {  // Chan et al. pairwise update
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    Stats out = a;
    const double na = static_cast<double>(a.count);
    const double nb = static_cast<double>(b.count);
    const double n = na + nb;
    const Eigen::MatrixXd delta = b.mean - a.mean;
    out.count = a.count + b.count;
    out.mean = a.mean + delta * (nb / n);
    out.m2 = a.m2 + b.m2 + delta.cwiseAbs2() * (na * nb / n);
    return out;
}

Stats tree_reduce(const std::vector<Stats>& parts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return parts[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return merge(tree_reduce(parts, lo, mid), tree_reduce(parts, mid, hi));
}

MomentEstimate finish(const ModelParams& params, const EigenSystem& es, const SimConfig& cfg, const Stats& st,
                      int blowups) {
    (void)params;
    MomentEstimate est;
    est.times.resize(cfg.nt + 1);
    for (int n = 0; n <= cfg.nt; ++n) est.times[n] = cfg.T * n / cfg.nt;
    est.grid = es.grid;
    est.replicates = static_cast<int>(st.count);
    est.blowups = blowups;
    if (st.count < 2) numerical_fail("simulate: fewer than two replicates survived the blow-up guard");
    est.mean = st.mean.cwiseMax(0.0);
    const double n = static_cast<double>(st.count);
    est.std_error = (st.m2.cwiseMax(0.0) / ((n - 1.0) * n)).cwiseSqrt();
    return est;
}

// Raw ensemble stream: one text header line, then little-endian records
// (uint32 replicate, uint32 time index, uint32 node index, float64 value).
class StreamWriter {
public:
    StreamWriter(const std::string& path, const ModelParams& params, const SimConfig& cfg) {
        if (path.empty()) return;
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) domain_fail("cannot open ensemble stream file " + path);
        std::ostringstream hdr;
        hdr.precision(17);
        hdr << "fracstorm-ensemble v1 record=<u32 replicate,u32 t_index,u32 x_index,f64 value> little-endian"
            << " seed=" << cfg.seed << " nx=" << cfg.nx << " nt=" << cfg.nt << " T=" << cfg.T
            << " replicates=" << cfg.replicates << " alpha=" << params.alpha << " beta=" << params.beta
            << " nu=" << params.nu << " R=" << params.R << " lambda=" << params.lambda
            << " noise=" << params.noise.name() << " sigma=" << cfg.sigma.describe() << "\n";
        out_ << hdr.str();
    }
    bool enabled() const { return out_.is_open(); }
    void write(std::uint32_t rep, const Eigen::MatrixXd& path) {  // path: (nt+1) x nx
        for (Eigen::Index n = 0; n < path.rows(); ++n)
            for (Eigen::Index i = 0; i < path.cols(); ++i) {
                const std::uint32_t ids[3] = {rep, static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(i)};
                const double v = path(n, i);
                out_.write(reinterpret_cast<const char*>(ids), sizeof ids);
                out_.write(reinterpret_cast<const char*>(&v), sizeof v);
            }
    }
    void close() {
        if (!out_.is_open()) return;
        out_.close();
        if (!out_) numerical_fail("failed writing the ensemble stream");
    }

private:
    std::ofstream out_;
};

bool blown(const Eigen::VectorXd& u, double guard) {
    return !u.allFinite() || u.cwiseAbs().maxCoeff() > guard;
}

}  // namespace

MomentEstimate simulate_mild(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0,
                             const SimConfig& cfg) {
    const Setup s = prepare(params, es, u0, cfg, true);
    const int nx = cfg.nx;
    const int nt = cfg.nt;
    const RieszCovariance* cov = s.cov ? &*s.cov : nullptr;

    // Kcat = [K_{nt-1}, ..., K_1, K_0]; its last (n+1) blocks multiply the stacked history [xi_0; ...; xi_n]
    Eigen::MatrixXd Kcat(nx, static_cast<Eigen::Index>(nt) * nx);
    for (int l = 0; l < nt; ++l) Kcat.middleCols(static_cast<Eigen::Index>(nt - 1 - l) * nx, nx) = s.K[l];

    const int nblocks = (cfg.replicates + kReplicateBlock - 1) / kReplicateBlock;
    std::vector<Stats> parts(nblocks, Stats(nt + 1, nx));
    std::vector<int> block_blowups(nblocks, 0);
    StreamWriter stream(cfg.stream_path, params, cfg);
    const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();

#pragma omp parallel for ordered schedule(static, 1) num_threads(threads)
    for (int b = 0; b < nblocks; ++b) {
        const int r0 = b * kReplicateBlock;
        const int B = std::min(kReplicateBlock, cfg.replicates - r0);
        std::vector<Philox4x32> rng;
        rng.reserve(B);
        for (int c = 0; c < B; ++c) rng.emplace_back(cfg.seed, static_cast<std::uint64_t>(r0 + c));
        Eigen::MatrixXd X(static_cast<Eigen::Index>(nt) * nx, B);
        Eigen::MatrixXd U = u0.replicate(1, B);
        std::vector<Eigen::MatrixXd> paths(B, Eigen::MatrixXd(nt + 1, nx));
        std::vector<bool> bad(B, false);
        for (int c = 0; c < B; ++c) paths[c].row(0) = u0.transpose();
        for (int n = 0; n < nt; ++n) {
            for (int c = 0; c < B; ++c) {
                const Eigen::VectorXd dW = sample_noise_slice(params.noise, cov, es.grid, s.dt, rng[c]);
                const Eigen::Index row0 = static_cast<Eigen::Index>(n) * nx;
                for (int i = 0; i < nx; ++i) X(row0 + i, c) = cfg.sigma(U(i, c)) * dW[i];
            }
            const Eigen::Index depth = static_cast<Eigen::Index>(n + 1) * nx;
            U.noalias() = params.lambda * (Kcat.rightCols(depth) * X.topRows(depth));
            U.colwise() += s.g[n + 1];
            for (int c = 0; c < B; ++c) {
                if (!bad[c] && blown(U.col(c), cfg.blowup_guard)) bad[c] = true;
                paths[c].row(n + 1) = U.col(c).transpose();
            }
        }
        for (int c = 0; c < B; ++c) {
            if (bad[c]) {
                ++block_blowups[b];
                continue;
            }
            parts[b].add(paths[c].cwiseAbs2());
        }
#pragma omp ordered
        {
            if (stream.enabled())
                for (int c = 0; c < B; ++c) stream.write(static_cast<std::uint32_t>(r0 + c), paths[c]);
        }
    }
    stream.close();
    int blowups = 0;
    for (int v : block_blowups) blowups += v;
    return finish(params, es, cfg, tree_reduce(parts, 0, parts.size()), blowups);
}

MomentEstimate simulate_mild_serial(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0,
                                    const SimConfig& cfg) {
    const Setup s = prepare(params, es, u0, cfg, true);
    const int nx = cfg.nx;
    const int nt = cfg.nt;
    const RieszCovariance* cov = s.cov ? &*s.cov : nullptr;
    Stats st(nt + 1, nx);
    int blowups = 0;
    std::vector<std::vector<double>> xi(nt, std::vector<double>(nx));
    for (int r = 0; r < cfg.replicates; ++r) {
        Philox4x32 rng(cfg.seed, static_cast<std::uint64_t>(r));
        Eigen::MatrixXd path(nt + 1, nx);
        path.row(0) = u0.transpose();
        bool bad = false;
        for (int n = 0; n < nt; ++n) {
            const Eigen::VectorXd dW = sample_noise_slice(params.noise, cov, es.grid, s.dt, rng);
            for (int i = 0; i < nx; ++i) xi[n][i] = cfg.sigma(path(n, i)) * dW[i];
            for (int i = 0; i < nx; ++i) {
                double acc = 0.0;
                for (int m = 0; m <= n; ++m) {
                    const Eigen::MatrixXd& K = s.K[n - m];
                    for (int k = 0; k < nx; ++k) acc += K(i, k) * xi[m][k];
                }
                path(n + 1, i) = s.g[n + 1][i] + params.lambda * acc;
            }
            if (!bad && blown(path.row(n + 1).transpose(), cfg.blowup_guard)) bad = true;
        }
        if (bad) {
            ++blowups;
            continue;
        }
        st.add(path.cwiseAbs2());
    }
    return finish(params, es, cfg, st, blowups);
}

MomentEstimate simulate_markov_reference(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0,
                                         const SimConfig& cfg) {
    if (!params.classical()) domain_fail("Markovian reference requires the classical limit beta = 1");
    const Setup s = prepare(params, es, u0, cfg, false);
    const int nx = cfg.nx;
    const int nt = cfg.nt;
    const RieszCovariance* cov = s.cov ? &*s.cov : nullptr;
    // Z_{n+1} = h P_dt Z_n + P_{dt/2} xi_n reproduces sum_m P_{(n-m+1/2) dt} xi_m (discrete Chapman-Kolmogorov)
    const Eigen::MatrixXd step = es.grid.h * dirichlet_kernel_matrix(es, 1.0, s.dt);
    const Eigen::MatrixXd half = dirichlet_kernel_matrix(es, 1.0, 0.5 * s.dt);
    Stats st(nt + 1, nx);
    int blowups = 0;
    for (int r = 0; r < cfg.replicates; ++r) {
        Philox4x32 rng(cfg.seed, static_cast<std::uint64_t>(r));
        Eigen::MatrixXd path(nt + 1, nx);
        path.row(0) = u0.transpose();
        Eigen::VectorXd Z = Eigen::VectorXd::Zero(nx);
        Eigen::VectorXd xi(nx);
        bool bad = false;
        for (int n = 0; n < nt; ++n) {
            const Eigen::VectorXd dW = sample_noise_slice(params.noise, cov, es.grid, s.dt, rng);
            for (int i = 0; i < nx; ++i) xi[i] = cfg.sigma(path(n, i)) * dW[i];
            Z = step * Z + half * xi;
            const Eigen::VectorXd u = s.g[n + 1] + params.lambda * Z;
            path.row(n + 1) = u.transpose();
            if (!bad && blown(u, cfg.blowup_guard)) bad = true;
        }
        if (bad) {
            ++blowups;
            continue;
        }
        st.add(path.cwiseAbs2());
    }
    return finish(params, es, cfg, st, blowups);
}

}  // namespace fracstorm
