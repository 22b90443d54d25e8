#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fracstorm/error.hpp"
#include "fracstorm/kernels.hpp"
#include "fracstorm/moments.hpp"
#include "fracstorm/params.hpp"
#include "fracstorm/simulate.hpp"

namespace fracstorm {

/// The λ-regression could not be carried out (degenerate grid or too few usable points).
class FitError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

enum class Functional {
    energy,  ///< E_t = (int_B M(t,x) dx)^{1/2}, the solution extended by zero outside B
    sup,     ///< E_t = sup_x M(t,x)
};
enum class Backend { volterra, montecarlo };

std::string to_string(Functional f);
std::string to_string(Backend b);

/// 2 alpha / (alpha - d beta) for white noise, 2 alpha / (alpha - gamma beta) for Riesz noise;
/// d_or_gamma is d for white noise and gamma for Riesz noise.
double theoretical_index(double alpha, double beta, double d_or_gamma, const NoiseModel& noise);

/// Geometric grid of `per_decade` points per decade from lo to hi (both included).
std::vector<double> geometric_grid(double lo, double hi, int per_decade);

struct ExcitationOptions {
    Functional functional = Functional::energy;
    double l_sigma = 1.0;
    int nt = 64;                    ///< Volterra time steps on [0, t]
    VolterraOptions volterra;
    SimConfig montecarlo;           ///< used by the Monte Carlo backend (T is set to t)
    double tolerance = -1.0;        ///< relative slope tolerance; < 0: 0.10 (white) / 0.12 (Riesz)
    int threads = 0;                ///< λ cells run concurrently; 0: OpenMP default
};

struct ExcitationFit {
    std::vector<double> lambdas;
    Functional functional = Functional::energy;
    Backend backend = Backend::volterra;
    std::vector<double> log_values;  ///< log E_t(λ)
    std::vector<double> log_stderr;  ///< Monte Carlo standard error of log E_t (0 for Volterra)
    std::vector<std::string> methods; ///< solver regime per λ
    std::vector<double> growth_rates; ///< dominant pole per λ (Volterra)
    std::vector<int> fit_indices;    ///< λ indices used by the regression (top decade)
    std::vector<double> residuals;   ///< residuals of the regression on fit_indices
    double slope = 0.0;              ///< d log log E_t / d log λ on the top decade
    double intercept = 0.0;
    double theory = 0.0;
    double tolerance = 0.0;
    double t = 0.0;
    bool pass = false;               ///< |slope / theory - 1| <= tolerance
    std::string verdict() const;     ///< e.g. "PASS ±10%"
};

/// Least-squares slope of log log E vs log λ on the top decade (auto-shrunk to the points with
/// E > 1; FitError if fewer than 4 remain or the λ values are degenerate).
void fit_top_decade(ExcitationFit& fit);

ExcitationFit excitation_sweep(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0, double t,
                               const std::vector<double>& lambdas, Backend backend, const ExcitationOptions& opt = {});

struct PositionReport {
    std::vector<double> probes;       ///< probe positions
    std::vector<double> slopes;       ///< fitted slope per probe (pointwise M(t, x))
    double energy_slope = 0.0;        ///< slope of the energy functional
    double max_deviation = 0.0;       ///< max |slope_i - slope_j| over probes
    double center_vs_energy = 0.0;    ///< |slope at the probe nearest 0 - energy slope|
    double theory = 0.0;
};

/// Repeats the Volterra sweep with pointwise M(t, x) at 5 probes spread over B(0, R - epsilon)
/// (a single probe at the centre when the ball contains only the central node).
PositionReport index_vs_position_check(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0,
                                       double t, double epsilon, const std::vector<double>& lambdas,
                                       const ExcitationOptions& opt = {});

}  // namespace fracstorm
