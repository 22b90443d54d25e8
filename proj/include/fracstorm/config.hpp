#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fracstorm/excitation.hpp"
#include "fracstorm/kernels.hpp"
#include "fracstorm/params.hpp"
#include "fracstorm/simulate.hpp"

namespace fracstorm {

/// Everything a CLI run needs. Text form: flat `key = value` lines with dotted sections
/// (model.alpha = 2), `#` comments, blank lines ignored.
struct RunConfig {
    ModelParams model;
    int n = 64;                  ///< grid.n: cells on (-R, R)
    double T = 0.1;              ///< time.T
    int nt = 64;                 ///< time.nt
    std::uint64_t seed = 1;      ///< run.seed
    int threads = 0;             ///< run.threads (0: FRACSTORM_THREADS or the OpenMP default)
    std::string output = ".";    ///< run.output: directory for artifacts
    std::string u0 = "const:1";  ///< initial.u0: const:c | bump:c | cos
    SigmaFunction sigma = SigmaFunction::linear(1.0);  ///< sigma.kind/sigma.l or sigma.table
    int replicates = 2000;       ///< sim.replicates
    double lambda_min = 1e2;     ///< excite.lambda_min
    double lambda_max = 1e6;     ///< excite.lambda_max
    int per_decade = 5;          ///< excite.per_decade
    double t_eval = 0.1;         ///< excite.t
    Functional functional = Functional::energy;  ///< excite.functional
    Backend backend = Backend::volterra;         ///< excite.backend

    /// Applies one key/value pair; DomainError on unknown keys or malformed values.
    void set(const std::string& key, const std::string& value);
    /// Parses the text form (later keys override earlier ones) and validates.
    static RunConfig parse(const std::string& text);
    static RunConfig from_file(const std::string& path);
    /// Text form with every key; parse(serialize()) == *this.
    std::string serialize() const;
    /// All invariants, with messages quoting the violated condition.
    void validate() const;
    /// Single-line summary used as the reproducibility comment of emitted artifacts.
    std::string summary() const;

    bool operator==(const RunConfig&) const = default;
};

/// Initial data sampled on the grid from a descriptor: const:c (c everywhere), bump:c (c on
/// |x| < R/2, 0 elsewhere) or cos (cos(pi x / 2R)).
Eigen::VectorXd make_initial_data(const std::string& descriptor, const SpaceGrid& grid);

/// Effective thread count: explicit value, else FRACSTORM_THREADS, else 0 (OpenMP default).
int resolve_threads(int requested);

}  // namespace fracstorm
