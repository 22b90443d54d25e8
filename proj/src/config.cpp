#include "fracstorm/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "fracstorm/error.hpp"

namespace fracstorm {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        domain_fail("config: " + key + " expects a number, got '" + v + "'");
    }
    if (pos != v.size()) domain_fail("config: " + key + " expects a number, got '" + v + "'");
    return x;
}

long long to_int(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &pos);
    } catch (const std::exception&) {
        domain_fail("config: " + key + " expects an integer, got '" + v + "'");
    }
    if (pos != v.size()) domain_fail("config: " + key + " expects an integer, got '" + v + "'");
    return x;
}

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

SigmaFunction parse_table(const std::string& v) {
    std::vector<double> u;
    std::vector<double> s;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ';')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) domain_fail("config: sigma.table expects u:sigma pairs separated by ';'");
        u.push_back(to_double("sigma.table", trim(item.substr(0, colon))));
        s.push_back(to_double("sigma.table", trim(item.substr(colon + 1))));
    }
    return SigmaFunction::table(u, s);
}

std::string table_text(const SigmaFunction& f) {
    std::string out;
    for (std::size_t i = 0; i < f.table_u().size(); ++i)
        out += (i ? ";" : "") + num(f.table_u()[i]) + ":" + num(f.table_s()[i]);
    return out;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if (key == "model.alpha") {
        model.alpha = to_double(key, v);
    } else if (key == "model.beta") {
        model.beta = to_double(key, v);
    } else if (key == "model.nu") {
        model.nu = to_double(key, v);
    } else if (key == "model.d") {
        model.d = static_cast<int>(to_int(key, v));
    } else if (key == "model.R") {
        model.R = to_double(key, v);
    } else if (key == "model.lambda") {
        model.lambda = to_double(key, v);
    } else if (key == "noise.kind") {
        if (v == "white") {
            model.noise.kind = NoiseKind::white;
            model.noise.gamma = 0.0;
        } else if (v == "riesz") {
            model.noise.kind = NoiseKind::riesz;
        } else {
            domain_fail("config: noise.kind must be 'white' or 'riesz', got '" + v + "'");
        }
    } else if (key == "noise.gamma") {
        model.noise.gamma = to_double(key, v);
    } else if (key == "grid.n") {
        n = static_cast<int>(to_int(key, v));
    } else if (key == "time.T") {
        T = to_double(key, v);
    } else if (key == "time.nt") {
        nt = static_cast<int>(to_int(key, v));
    } else if (key == "run.seed") {
        const long long s = to_int(key, v);
        if (s < 0) domain_fail("config: run.seed must be nonnegative");
        seed = static_cast<std::uint64_t>(s);
    } else if (key == "run.threads") {
        threads = static_cast<int>(to_int(key, v));
    } else if (key == "run.output") {
        output = v;
    } else if (key == "initial.u0") {
        u0 = v;
    } else if (key == "sigma.l") {
        sigma = SigmaFunction::linear(to_double(key, v));
    } else if (key == "sigma.table") {
        sigma = parse_table(v);
    } else if (key == "sim.replicates") {
        replicates = static_cast<int>(to_int(key, v));
    } else if (key == "excite.lambda_min") {
        lambda_min = to_double(key, v);
    } else if (key == "excite.lambda_max") {
        lambda_max = to_double(key, v);
    } else if (key == "excite.per_decade") {
        per_decade = static_cast<int>(to_int(key, v));
    } else if (key == "excite.t") {
        t_eval = to_double(key, v);
    } else if (key == "excite.functional") {
        if (v == "energy") {
            functional = Functional::energy;
        } else if (v == "sup") {
            functional = Functional::sup;
        } else {
            domain_fail("config: excite.functional must be 'energy' or 'sup', got '" + v + "'");
        }
    } else if (key == "excite.backend") {
        if (v == "volterra") {
            backend = Backend::volterra;
        } else if (v == "montecarlo") {
            backend = Backend::montecarlo;
        } else {
            domain_fail("config: excite.backend must be 'volterra' or 'montecarlo', got '" + v + "'");
        }
    } else {
        domain_fail("config: unknown key '" + key + "'");
    }
}

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig c;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            domain_fail("config line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
        c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    c.validate();
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) domain_fail("config file not found or unreadable: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string RunConfig::serialize() const {
    std::ostringstream os;
    os << "model.alpha = " << num(model.alpha) << "\n"
       << "model.beta = " << num(model.beta) << "\n"
       << "model.nu = " << num(model.nu) << "\n"
       << "model.d = " << model.d << "\n"
       << "model.R = " << num(model.R) << "\n"
       << "model.lambda = " << num(model.lambda) << "\n"
       << "noise.kind = " << (model.noise.is_white() ? "white" : "riesz") << "\n"
       << "noise.gamma = " << num(model.noise.gamma) << "\n"
       << "grid.n = " << n << "\n"
       << "time.T = " << num(T) << "\n"
       << "time.nt = " << nt << "\n"
       << "run.seed = " << seed << "\n"
       << "run.threads = " << threads << "\n"
       << "run.output = " << output << "\n"
       << "initial.u0 = " << u0 << "\n";
    if (sigma.is_linear()) {
        os << "sigma.l = " << num(sigma.slope()) << "\n";
    } else {
        os << "sigma.table = " << table_text(sigma) << "\n";
    }
    os << "sim.replicates = " << replicates << "\n"
       << "excite.lambda_min = " << num(lambda_min) << "\n"
       << "excite.lambda_max = " << num(lambda_max) << "\n"
       << "excite.per_decade = " << per_decade << "\n"
       << "excite.t = " << num(t_eval) << "\n"
       << "excite.functional = " << to_string(functional) << "\n"
       << "excite.backend = " << to_string(backend) << "\n";
    return os.str();
}

void RunConfig::validate() const {
    model.validate();
    if (n < 8) domain_fail("grid.n >= 8 violated (grid.n=" + std::to_string(n) + ")");
    if (!(T > 0.0)) domain_fail("time.T > 0 violated");
    if (nt < 1) domain_fail("time.nt >= 1 violated");
    if (threads < 0) domain_fail("run.threads >= 0 violated");
    if (replicates < 2) domain_fail("sim.replicates >= 2 violated");
    if (!(lambda_min > 0.0 && lambda_max > lambda_min)) domain_fail("0 < excite.lambda_min < excite.lambda_max violated");
    if (per_decade < 1) domain_fail("excite.per_decade >= 1 violated");
    if (!(t_eval > 0.0)) domain_fail("excite.t > 0 violated");
    if (output.empty()) domain_fail("run.output must not be empty");
    (void)make_initial_data(u0, SpaceGrid(model.R, n));
}

std::string RunConfig::summary() const {
    std::ostringstream os;
    os << "fracstorm " << FRACSTORM_VERSION << " seed=" << seed << " alpha=" << num(model.alpha)
       << " beta=" << num(model.beta) << " nu=" << num(model.nu) << " d=" << model.d << " R=" << num(model.R)
       << " lambda=" << num(model.lambda) << " noise=" << model.noise.name() << " n=" << n << " T=" << num(T)
       << " nt=" << nt << " u0=" << u0 << " sigma=" << sigma.describe() << " replicates=" << replicates;
    return os.str();
}

Eigen::VectorXd make_initial_data(const std::string& descriptor, const SpaceGrid& grid) {
    const auto colon = descriptor.find(':');
    const std::string kind = descriptor.substr(0, colon);
    double c = 1.0;
    if (colon != std::string::npos) c = to_double("initial.u0", descriptor.substr(colon + 1));
    Eigen::VectorXd u(grid.n);
    if (kind == "const") {
        u.setConstant(c);
    } else if (kind == "bump") {
        for (int i = 0; i < grid.n; ++i) u[i] = std::abs(grid.nodes[i]) < 0.5 * grid.R ? c : 0.0;
    } else if (kind == "cos" && colon == std::string::npos) {
        for (int i = 0; i < grid.n; ++i) u[i] = std::cos(std::numbers::pi * grid.nodes[i] / (2.0 * grid.R));
    } else {
        domain_fail("initial.u0 must be const:c, bump:c or cos, got '" + descriptor + "'");
    }
    if ((u.array() < 0.0).any()) domain_fail("initial.u0 must be nonnegative");
    return u;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FRACSTORM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
        domain_fail(std::string("FRACSTORM_THREADS must be a positive integer, got '") + env + "'");
    }
    return 0;
}

}  // namespace fracstorm
