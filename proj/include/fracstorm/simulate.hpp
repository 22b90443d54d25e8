#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracstorm/kernels.hpp"
#include "fracstorm/params.hpp"
#include "fracstorm/riesz.hpp"
#include "fracstorm/rng.hpp"

namespace fracstorm {

/// Globally Lipschitz sigma with sigma(0) = 0: linear l u, or the piecewise-linear interpolant of a
/// table (u_i, sigma_i) extended linearly beyond its end points.
class SigmaFunction {
public:
    static SigmaFunction linear(double l);
    static SigmaFunction table(std::vector<double> u, std::vector<double> s);

    double operator()(double u) const;
    bool is_linear() const { return u_.empty(); }
    double slope() const { return l_; }  ///< the linear coefficient (linear case)
    double lipschitz() const;
    std::string describe() const;
    const std::vector<double>& table_u() const { return u_; }
    const std::vector<double>& table_s() const { return s_; }
    bool operator==(const SigmaFunction&) const = default;

private:
    double l_ = 1.0;
    std::vector<double> u_;
    std::vector<double> s_;
};

struct SimConfig {
    int nx = 64;
    int nt = 128;
    double T = 0.5;
    int replicates = 2000;
    std::uint64_t seed = 1;
    SigmaFunction sigma = SigmaFunction::linear(1.0);
    int threads = 0;                ///< 0: OpenMP default
    double blowup_guard = 1e100;    ///< |u| above this flags the replicate as blown up
    std::string stream_path;        ///< optional raw ensemble output (binary records)

    void validate() const;
};

struct MomentEstimate {
    std::vector<double> times;
    SpaceGrid grid;
    Eigen::MatrixXd mean;    ///< E|u_t(x)|^2, rows: times
    Eigen::MatrixXd std_error;  ///< standard error of the mean (per point)
    int replicates = 0;      ///< replicates used
    int blowups = 0;         ///< replicates excluded by the blow-up guard
};

/// Noise increments of one time slice: white N(0, dt h) per cell, coloured factor * xi * sqrt(dt) h.
Eigen::VectorXd sample_noise_slice(const NoiseModel& noise, const RieszCovariance* cov, const SpaceGrid& grid,
                                   double dt, Philox4x32& rng);

/// Full-history mild-form scheme, parallel over fixed blocks of replicates.
MomentEstimate simulate_mild(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0,
                             const SimConfig& config);

/// Straightforward single-threaded loop implementation of the same scheme (testing reference).
MomentEstimate simulate_mild_serial(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0,
                                    const SimConfig& config);

/// Classical limit (beta = 1): Markovian stepping Z <- P_dt Z + P_{dt/2} sigma(u) dW with the same
/// noise streams; pathwise identical to simulate_mild up to rounding.
MomentEstimate simulate_markov_reference(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0,
                                         const SimConfig& config);

/// Replicates per block; blocks are the unit of parallel work and of the reduction tree.
inline constexpr int kReplicateBlock = 32;

}  // namespace fracstorm
