#include "fracstorm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "fracstorm/error.hpp"
#include "fracstorm/lag_kernel.hpp"
#include "fracstorm/riesz.hpp"

namespace fracstorm {

std::string to_string(MomentMethod m) {
    return m == MomentMethod::time_stepping ? "time_stepping" : "renewal_asymptotic";
}

// --- MomentField ---------------------------------------------------------------------------------

double MomentField::log_M(int j, int i) const {
    const double v = values(j, i);
    return v > 0.0 ? std::log(v) + log_scale[j] : -std::numeric_limits<double>::infinity();
}

double MomentField::log_sup(int j) const {
    const double v = values.row(j).maxCoeff();
    return v > 0.0 ? std::log(v) + log_scale[j] : -std::numeric_limits<double>::infinity();
}

double MomentField::log_integral(int j) const {
    const double v = values.row(j).sum() * grid.h;
    return v > 0.0 ? std::log(v) + log_scale[j] : -std::numeric_limits<double>::infinity();
}

void MomentField::set_row(int j, const Eigen::VectorXd& v, double s) {
    const double m = v.maxCoeff();
    if (!(m > 0.0)) {
        values.row(j) = v.cwiseMax(0.0).transpose();
        log_scale[j] = 0.0;
        return;
    }
    const double k = std::floor(std::log(m));
    values.row(j) = (v * std::exp(-k)).cwiseMax(0.0).transpose();
    log_scale[j] = s + k;
}

void MomentField::set_row_log(int j, const Eigen::VectorXd& logM) {
    const double m = logM.maxCoeff();
    if (!std::isfinite(m)) {
        values.row(j).setZero();
        log_scale[j] = 0.0;
        return;
    }
    const double k = std::floor(m);
    values.row(j) = (logM.array() - k).exp().matrix().transpose();
    log_scale[j] = k;
}

MomentField TwoPointField::diagonal() const {
    MomentField f;
    f.times = times;
    f.grid = grid;
    f.log_scale.assign(times.size(), 0.0);
    f.values.resize(static_cast<Eigen::Index>(times.size()), grid.n);
    for (std::size_t j = 0; j < times.size(); ++j)
        f.set_row(static_cast<int>(j), values[j].diagonal(), log_scale[j]);
    f.method = method;
    f.valid_from = valid_from;
    f.growth_rate = growth_rate;
    f.steps = steps;
    return f;
}

namespace {

std::vector<double> uniform_times(double T, int nt) {
    std::vector<double> t(nt + 1);
    for (int j = 0; j <= nt; ++j) t[j] = T * j / nt;
    return t;
}

// Normalises a state so that its largest entry lies in [1, e); returns the exponent moved out.
template <class V>
double renormalise(V& v) {
    const double m = v.maxCoeff();
    if (!(m > 0.0) || !std::isfinite(m)) {
        if (!std::isfinite(m)) numerical_fail("moment solver overflow despite log scaling");
        return 0.0;
    }
    const double k = std::floor(std::log(m));
    v *= std::exp(-k);
    return k;
}

// --- dominant pole of the renewal equation ------------------------------------------------------
//
// The moment equation is X = X0 + A * X (time convolution with a positive operator kernel). After
// a diagonal similarity P the Laplace transform of A is a symmetric matrix S(r); the growth rate
// is the r* with spectral radius rho(S(r*)) = 1.

struct PoleData {
    double r = 0.0;
    Eigen::VectorXd u;  ///< Perron eigenvector of S(r*), positive, unit norm
    double slope = 0.0; ///< u^T S'(r*) u  (< 0)
};

using SymBuilder = std::function<void(double r, Eigen::MatrixXd& S, Eigen::MatrixXd& Sd)>;

struct Eval {
    double f = 0.0;   // log rho
    double fp = 0.0;  // d log rho / d log r
    Eigen::VectorXd u;
    double slope = 0.0;
};

Eval eval_pole(const SymBuilder& build, double r) {
    Eigen::MatrixXd S;
    Eigen::MatrixXd Sd;
    build(r, S, Sd);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (S + S.transpose()));
    if (eig.info() != Eigen::Success) numerical_fail("growth-rate search: eigen solver failed");
    const Eigen::Index top = eig.eigenvalues().size() - 1;
    const double rho = eig.eigenvalues()[top];
    Eval e;
    e.u = eig.eigenvectors().col(top);
    if (e.u.sum() < 0.0) e.u = -e.u;
    e.slope = e.u.dot(Sd * e.u);
    if (!(rho > 0.0)) {
        e.f = -std::numeric_limits<double>::infinity();
        return e;
    }
    e.f = std::log(rho);
    e.fp = r * e.slope / rho;
    return e;
}

// Safeguarded Newton iteration in (log r, log rho). Returns nothing when rho < 1 already at r_min.
std::optional<PoleData> find_pole(const SymBuilder& build, double r0, double r_min) {
    double y = std::log(r0);
    double ylo = -std::numeric_limits<double>::infinity();
    double yhi = std::numeric_limits<double>::infinity();
    const double y_min = std::log(r_min);
    for (int it = 0; it < 200; ++it) {
        const Eval e = eval_pole(build, std::exp(y));
        if (std::abs(e.f) < 1e-13) return PoleData{std::exp(y), e.u, e.slope};
        if (e.f > 0.0) {
            ylo = y;
        } else {
            yhi = y;
            if (y <= y_min) return std::nullopt;
        }
        double yn = (std::isfinite(e.f) && e.fp < 0.0) ? y - e.f / e.fp : y - 2.0;
        yn = std::clamp(yn, y - 5.0, y + 5.0);
        if (std::isfinite(ylo) && std::isfinite(yhi)) {
            if (!(yn > ylo && yn < yhi)) yn = 0.5 * (ylo + yhi);
            if (yhi - ylo < 1e-14 * std::max(1.0, std::abs(y))) return PoleData{std::exp(y), e.u, e.slope};
        }
        y = std::max(yn, y_min);
    }
    numerical_fail("growth-rate search did not converge");
}

// Eigenvectors of S(r*) whose eigenvalues lie within |dρ/dr| / T of the top one. Their poles differ
// from r* by less than 1/T, so over [0, T] they grow at the same rate as the Perron mode. At very
// large r* the operator tends to a multiple of the identity and the Perron vector alone is no
// longer determined; the cluster projection is.
Eigen::MatrixXd top_cluster(const SymBuilder& build, const PoleData& pole, double T) {
    Eigen::MatrixXd S;
    Eigen::MatrixXd Sd;
    build(pole.r, S, Sd);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (S + S.transpose()));
    if (eig.info() != Eigen::Success) numerical_fail("growth-rate search: eigen solver failed");
    const Eigen::Index top = eig.eigenvalues().size() - 1;
    // eigenvalue differences below the rounding level of the solver are treated as degenerate too
    const double noise = 1e-12 * std::abs(eig.eigenvalues()[top]);
    const double cut = eig.eigenvalues()[top] - std::max(std::abs(pole.slope) / T, noise);
    Eigen::Index first = top;
    while (first > 0 && eig.eigenvalues()[first - 1] >= cut) --first;
    return eig.eigenvectors().rightCols(top - first + 1);
}

// Amplitude a with M(t) ~ a e^{r* t}: positive in exact arithmetic; entries of weakly coupled nodes
// may come out as rounding noise around zero, which is tolerated (and clipped) relative to the
// largest entry.
Eigen::VectorXd positive_amplitude(const Eigen::VectorXd& a, double slope) {
    if (!(slope < 0.0) || !(a.maxCoeff() > 0.0) || a.minCoeff() < -1e-10 * a.maxCoeff())
        numerical_fail("renewal asymptotics: dominant-mode amplitude not positive");
    return a.cwiseMax(0.0);
}

int refinement(double rate, double T, int nt, const VolterraOptions& opt) {
    if (!(rate > 0.0)) return 1;
    const double f = std::ceil(rate * T / (opt.max_rate_step * nt));
    return static_cast<int>(std::clamp(f, 1.0, static_cast<double>(std::max(1, opt.max_refinement))));
}

void check_inputs(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0, double l_sigma,
                  double T, int nt) {
    params.validate();
    if (params.d != 1) domain_fail("moment solvers support d = 1 only");
    if (u0.size() != es.size()) domain_fail("u0 must be sampled on the eigen-system grid");
    if (!u0.allFinite()) domain_fail("u0 must be finite");
    if (!(T > 0.0) || nt < 1) domain_fail("T > 0 and nt >= 1 required");
    if (!std::isfinite(l_sigma)) domain_fail("l_sigma must be finite");
    if (params.d * params.beta / params.alpha >= 1.0)
        domain_fail("d beta / alpha < 1 violated: the lag kernel is not integrable");
    if (!(es.alpha > 0.0)) domain_fail("eigen system lacks alpha/nu (use make_eigen_system)");
}

// Khatri-Rao factor Z(x, n + N m) = phi_n(x) phi_m(x).
Eigen::MatrixXd khatri_rao(const Eigen::MatrixXd& phi) {
    const Eigen::Index n = phi.rows();
    const Eigen::Index N = phi.cols();
    Eigen::MatrixXd Z(n, N * N);
    for (Eigen::Index m = 0; m < N; ++m)
        for (Eigen::Index k = 0; k < N; ++k) Z.col(k + N * m) = phi.col(k).cwiseProduct(phi.col(m));
    return Z;
}

// W = Z diag(vec L) Z^T, i.e. W(x,y) = sum_nm phi_n(x) phi_m(x) L_nm phi_n(y) phi_m(y).
Eigen::MatrixXd white_operator(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& L) {
    const Eigen::Map<const Eigen::VectorXd> vl(L.data(), L.size());
    return (Z * vl.asDiagonal()) * Z.transpose();
}

// diag(Phi H Phi^T)
Eigen::VectorXd diag_sandwich(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& H) {
    return (phi * H).cwiseProduct(phi).rowwise().sum();
}

}  // namespace

// --- white noise -----------------------------------------------------------------------------------

MomentField second_moment_white(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0,
                                double l_sigma, double T, int nt, const VolterraOptions& opt) {
    check_inputs(params, es, u0, l_sigma, T, nt);
    const int n = es.size();
    const double beta = params.beta;
    const double h = es.grid.h;
    const double coupling = params.lambda * params.lambda * l_sigma * l_sigma;
    const Eigen::VectorXd c = h * es.phi.transpose() * u0;
    auto g_at = [&](double t) -> Eigen::VectorXd {
        if (t == 0.0) return u0;
        return es.phi * mode_decay(es, beta, t).cwiseProduct(c);
    };

    MomentField out;
    out.times = uniform_times(T, nt);
    out.grid = es.grid;
    out.log_scale.assign(nt + 1, 0.0);
    out.values = Eigen::MatrixXd::Zero(nt + 1, n);
    out.set_row(0, u0.cwiseAbs2(), 0.0);

    if (coupling == 0.0 || u0.cwiseAbs().maxCoeff() == 0.0) {
        for (int j = 1; j <= nt; ++j) out.set_row(j, g_at(out.times[j]).cwiseAbs2(), 0.0);
        out.steps = nt;
        return out;
    }

    const SubgridModel sub{opt.subgrid, 0.0};
    const Eigen::MatrixXd Z = khatri_rao(es.phi);

    // growth rate of the semi-discrete equation
    const LaplaceTable lap = build_laplace_table(es, beta, 10.0 * T, sub);
    const SymBuilder builder = [&](double r, Eigen::MatrixXd& S, Eigen::MatrixXd& Sd) {
        S = coupling * (h * white_operator(Z, lap.transform(r)));
        S.diagonal().array() += coupling * lap.ksub_transform(r);
        Sd = coupling * (h * white_operator(Z, lap.transform_derivative(r)));
        Sd.diagonal().array() += coupling * lap.ksub_derivative(r);
    };
    const double kappa = params.d * beta / params.alpha;
    const double cstar = green_l2_constant(params.alpha, beta, params.nu, params.d);
    const double r0 = std::pow(coupling * cstar * std::tgamma(1.0 - kappa), 1.0 / (1.0 - kappa));
    const auto pole = find_pole(builder, std::max(r0, 1e-3 / T), 1e-6 / T);
    out.growth_rate = pole ? pole->r : 0.0;

    if (pole && opt.allow_asymptotic && pole->r * T > opt.asymptotic_threshold) {
        const double r = pole->r;
        const Eigen::MatrixXd U = top_cluster(builder, *pole, T);
        const Eigen::MatrixXd L = lap.transform(r);
        const Eigen::MatrixXd Lc = L.cwiseProduct(c * c.transpose());
        const Eigen::VectorXd m0 = diag_sandwich(es.phi, Lc);
        const Eigen::VectorXd amp = positive_amplitude(U * (U.transpose() * m0) / (-pole->slope), pole->slope);
        const Eigen::VectorXd log_u = amp.array().log().matrix();
        out.method = MomentMethod::renewal_asymptotic;
        out.valid_from = opt.asymptotic_threshold / r;
        out.steps = 0;
        for (int j = 1; j <= nt; ++j) {
            const double t = out.times[j];
            Eigen::VectorXd lm = (log_u.array() + r * t).matrix();
            if (t < out.valid_from) {
                const Eigen::VectorXd g2 = g_at(t).cwiseAbs2();
                for (int i = 0; i < n; ++i)
                    if (g2[i] > 0.0) lm[i] = std::max(lm[i], std::log(g2[i]));
            }
            out.set_row_log(j, lm);
        }
        return out;
    }

    // product-integration time stepping
    const int f = refinement(out.growth_rate, T, nt, opt);
    const int N = nt * f;
    const double dt = T / N;
    LagTables lt = build_lag_tables(es, beta, dt, N, sub);
    for (int m = N - 1; m >= 1; --m) {  // Lb[m] <- Lb[m] + La[m-1]: weight of the node j - m
        lt.Lb[m] += lt.La[m - 1];
        lt.kb[m] += lt.ka[m - 1];
    }
    Eigen::MatrixXd A0 = -coupling * h * white_operator(Z, lt.Lb[0]);
    A0.diagonal().array() += 1.0 - coupling * lt.kb[0];
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A0);

    std::vector<Eigen::VectorXd> v(N + 1);
    std::vector<Eigen::MatrixXd> Y(N + 1);
    std::vector<double> s(N + 1, 0.0);
    v[0] = u0.cwiseAbs2();
    s[0] = renormalise(v[0]);
    Y[0] = es.phi.transpose() * v[0].asDiagonal() * es.phi;
    Eigen::MatrixXd H(n, n);
    Eigen::VectorXd S(n);
    for (int j = 1; j <= N; ++j) {
        const double ref = s[j - 1];
        double w = std::exp(s[0] - ref);
        H = (w * lt.La[j - 1]).cwiseProduct(Y[0]);
        S = (w * lt.ka[j - 1]) * v[0];
        for (int m = 1; m < j; ++m) {
            w = std::exp(s[j - m] - ref);
            if (w == 0.0) continue;
            H.noalias() += (w * lt.Lb[m]).cwiseProduct(Y[j - m]);
            S.noalias() += (w * lt.kb[m]) * v[j - m];
        }
        Eigen::VectorXd rhs = g_at(j * dt).cwiseAbs2() * std::exp(-ref);
        rhs += coupling * (h * diag_sandwich(es.phi, H) + S);
        v[j] = lu.solve(rhs);
        if (!v[j].allFinite()) numerical_fail("white moment solver produced non-finite values");
        s[j] = ref + renormalise(v[j]);
        Y[j] = es.phi.transpose() * v[j].asDiagonal() * es.phi;
    }
    for (int j = 1; j <= nt; ++j) out.set_row(j, v[j * f], s[j * f]);
    out.steps = N;
    return out;
}

// --- Riesz-coloured noise -------------------------------------------------------------------------

namespace {

// Packed coordinates of symmetric n x n matrices: p <-> (a, b), a <= b.
struct Packing {
    int n = 0;
    std::vector<std::pair<int, int>> pairs;
    explicit Packing(int n_) : n(n_) {
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) pairs.emplace_back(a, b);
    }
    int size() const { return static_cast<int>(pairs.size()); }
    Eigen::VectorXd pack(const Eigen::MatrixXd& K) const {
        Eigen::VectorXd p(size());
        for (int q = 0; q < size(); ++q) p[q] = K(pairs[q].first, pairs[q].second);
        return p;
    }
    Eigen::MatrixXd unpack(const Eigen::VectorXd& p) const {
        Eigen::MatrixXd K(n, n);
        for (int q = 0; q < size(); ++q) {
            K(pairs[q].first, pairs[q].second) = p[q];
            K(pairs[q].second, pairs[q].first) = p[q];
        }
        return K;
    }
};

// Packed matrix of K -> Phi (L o (h^2 Phi^T (C o K) Phi)) Phi^T + ks Diag(K).
Eigen::MatrixXd colored_packed_operator(const Packing& pk, const Eigen::MatrixXd& phi, const Eigen::MatrixXd& C,
                                        double h, const Eigen::MatrixXd& L, double ks) {
    const int P = pk.size();
    Eigen::MatrixXd M(P, P);
    Eigen::MatrixXd X;
    for (int q = 0; q < P; ++q) {
        const auto [a, b] = pk.pairs[q];
        const Eigen::VectorXd pa = phi.row(a).transpose();
        const Eigen::VectorXd pb = phi.row(b).transpose();
        const double w = h * h * C(a, b);
        if (a == b) {
            X = w * pa * pa.transpose();
        } else {
            X = w * (pa * pb.transpose() + pb * pa.transpose());
        }
        const Eigen::MatrixXd out = phi * L.cwiseProduct(X) * phi.transpose();
        M.col(q) = pk.pack(out);
        if (a == b) M(q, q) += ks;
    }
    return M;
}

}  // namespace

TwoPointField second_moment_colored(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0,
                                    double l_sigma, double gamma, double T, int nt, const VolterraOptions& opt) {
    check_inputs(params, es, u0, l_sigma, T, nt);
    if (!(gamma > 0.0 && gamma < std::min(params.alpha, 1.0)))
        domain_fail("0 < γ < min(α, d) violated (gamma=" + std::to_string(gamma) + ")");
    const int n = es.size();
    if (n > kMaxColoredGrid)
        domain_fail("second_moment_colored: grid size " + std::to_string(n) + " exceeds the memory guard n <= " +
                    std::to_string(kMaxColoredGrid));
    const double beta = params.beta;
    const double h = es.grid.h;
    const double coupling = params.lambda * params.lambda * l_sigma * l_sigma;
    const Eigen::MatrixXd& phi = es.phi;
    const Eigen::VectorXd c = h * phi.transpose() * u0;
    auto g_at = [&](double t) -> Eigen::VectorXd {
        if (t == 0.0) return u0;
        return phi * mode_decay(es, beta, t).cwiseProduct(c);
    };
    const RieszCovariance rc = build_riesz_covariance(es.grid, gamma);
    const Eigen::MatrixXd& C = rc.C;

    TwoPointField out;
    out.times = uniform_times(T, nt);
    out.grid = es.grid;
    out.log_scale.assign(nt + 1, 0.0);
    out.values.assign(nt + 1, Eigen::MatrixXd::Zero(n, n));
    auto set = [&](int j, Eigen::MatrixXd K, double s) {
        out.log_scale[j] = s + renormalise(K);
        out.values[j] = 0.5 * (K + K.transpose());
    };
    set(0, u0 * u0.transpose(), 0.0);
    if (coupling == 0.0 || u0.cwiseAbs().maxCoeff() == 0.0) {
        for (int j = 1; j <= nt; ++j) {
            const Eigen::VectorXd g = g_at(out.times[j]);
            set(j, g * g.transpose(), 0.0);
        }
        out.steps = nt;
        return out;
    }

    const SubgridModel sub{opt.subgrid, gamma};
    const Packing pk(n);
    const int P = pk.size();
    // similarity P = diag(sqrt(m c)): m = multiplicity of the packed coordinate, c = C_ab
    Eigen::VectorXd sim(P);
    for (int q = 0; q < P; ++q) {
        const auto [a, b] = pk.pairs[q];
        sim[q] = std::sqrt((a == b ? 1.0 : 2.0) * C(a, b));
    }
    const LaplaceTable lap = build_laplace_table(es, beta, 10.0 * T, sub);
    const SymBuilder builder = [&](double r, Eigen::MatrixXd& S, Eigen::MatrixXd& Sd) {
        S = coupling * colored_packed_operator(pk, phi, C, h, lap.transform(r), lap.ksub_transform(r));
        S = sim.asDiagonal() * S * sim.cwiseInverse().asDiagonal();
        Sd = coupling * colored_packed_operator(pk, phi, C, h, lap.transform_derivative(r), lap.ksub_derivative(r));
        Sd = sim.asDiagonal() * Sd * sim.cwiseInverse().asDiagonal();
    };
    const double kappa = gamma * beta / params.alpha;
    const double r0 = std::pow(coupling * std::tgamma(1.0 - kappa), 1.0 / (1.0 - kappa));
    const auto pole = find_pole(builder, std::max(r0, 1e-3 / T), 1e-6 / T);
    out.growth_rate = pole ? pole->r : 0.0;

    if (pole && opt.allow_asymptotic && pole->r * T > opt.asymptotic_threshold) {
        const double r = pole->r;
        const Eigen::MatrixXd U = top_cluster(builder, *pole, T);
        const Eigen::MatrixXd L = lap.transform(r);
        const Eigen::MatrixXd K0 = phi * L.cwiseProduct(c * c.transpose()) * phi.transpose();
        // right eigenvectors P^-1 U, left eigenvectors P U
        const Eigen::VectorXd ell = U.transpose() * sim.cwiseProduct(pk.pack(K0));
        const Eigen::VectorXd k =
            positive_amplitude((U * ell).cwiseQuotient(sim) / (-pole->slope), pole->slope);
        const Eigen::MatrixXd logk = pk.unpack(k.array().log().matrix());
        out.method = MomentMethod::renewal_asymptotic;
        out.valid_from = opt.asymptotic_threshold / r;
        out.steps = 0;
        for (int j = 1; j <= nt; ++j) {
            const double t = out.times[j];
            Eigen::MatrixXd lk = (logk.array() + r * t).matrix();
            const double top = lk.maxCoeff();
            Eigen::MatrixXd K = (lk.array() - std::floor(top)).exp().matrix();
            double s = std::floor(top);
            if (t < out.valid_from) {
                const Eigen::VectorXd g = g_at(t);
                const Eigen::MatrixXd gg = (g * g.transpose()) * std::exp(-s);
                K = K.cwiseMax(gg);
            }
            set(j, K, s);
        }
        return out;
    }

    const int f = refinement(out.growth_rate, T, nt, opt);
    const int N = nt * f;
    const double dt = T / N;
    LagTables lt = build_lag_tables(es, beta, dt, N, sub);
    for (int m = N - 1; m >= 1; --m) {
        lt.Lb[m] += lt.La[m - 1];
        lt.kb[m] += lt.ka[m - 1];
    }
    Eigen::MatrixXd T0 = -coupling * colored_packed_operator(pk, phi, C, h, lt.Lb[0], lt.kb[0]);
    T0.diagonal().array() += 1.0;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(T0);

    std::vector<Eigen::MatrixXd> V(N + 1);
    std::vector<Eigen::MatrixXd> Y(N + 1);
    std::vector<double> s(N + 1, 0.0);
    auto modal = [&](const Eigen::MatrixXd& K) -> Eigen::MatrixXd {
        return (h * h) * (phi.transpose() * C.cwiseProduct(K) * phi);
    };
    V[0] = u0 * u0.transpose();
    s[0] = renormalise(V[0]);
    Y[0] = modal(V[0]);
    Eigen::MatrixXd H(n, n);
    Eigen::VectorXd D(n);
    for (int j = 1; j <= N; ++j) {
        const double ref = s[j - 1];
        double w = std::exp(s[0] - ref);
        H = (w * lt.La[j - 1]).cwiseProduct(Y[0]);
        D = (w * lt.ka[j - 1]) * V[0].diagonal();
        for (int m = 1; m < j; ++m) {
            w = std::exp(s[j - m] - ref);
            if (w == 0.0) continue;
            H.noalias() += (w * lt.Lb[m]).cwiseProduct(Y[j - m]);
            D.noalias() += (w * lt.kb[m]) * V[j - m].diagonal();
        }
        const Eigen::VectorXd g = g_at(j * dt);
        Eigen::MatrixXd rhs = (g * g.transpose()) * std::exp(-ref);
        rhs += coupling * (phi * H * phi.transpose());
        rhs.diagonal() += coupling * D;
        Eigen::MatrixXd K = pk.unpack(lu.solve(pk.pack(rhs)));
        if (!K.allFinite()) numerical_fail("colored moment solver produced non-finite values");
        s[j] = ref + renormalise(K);
        V[j] = std::move(K);
        Y[j] = modal(V[j]);
    }
    for (int j = 1; j <= nt; ++j) set(j, V[j * f], s[j * f]);
    out.steps = N;
    return out;
}

}  // namespace fracstorm
