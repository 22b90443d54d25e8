#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fracstorm/fracfun.hpp"
#include "fracstorm/kernels.hpp"
#include "fracstorm/params.hpp"

namespace fracstorm {

/// How a moment surface was obtained.
enum class MomentMethod {
    time_stepping,       ///< product-integration time stepping of the Volterra equation
    renewal_asymptotic,  ///< dominant-pole (renewal) asymptotics of the same discrete equation
};
std::string to_string(MomentMethod m);

/// Second moment M(t_j, x_i) = values(j, i) * exp(log_scale[j]); every nonzero row of values
/// has its maximum in [1, e).
struct MomentField {
    std::vector<double> times;
    SpaceGrid grid;
    std::vector<double> log_scale;
    Eigen::MatrixXd values;  ///< rows: times, columns: grid nodes
    MomentMethod method = MomentMethod::time_stepping;
    double valid_from = 0.0;   ///< earliest time at which the method is accurate
    double growth_rate = 0.0;  ///< dominant pole r* (0 if none was found)
    int steps = 0;             ///< time steps actually taken

    double M(int j, int i) const { return values(j, i) * std::exp(log_scale[j]); }
    double log_M(int j, int i) const;
    /// log sup_x M(t_j, x)
    double log_sup(int j) const;
    /// log int_B M(t_j, x) dx (cell sum)
    double log_integral(int j) const;
    /// Stores a row given in log form.
    void set_row_log(int j, const Eigen::VectorXd& logM);
    /// Stores a row given as (v, s) with M = v e^s.
    void set_row(int j, const Eigen::VectorXd& v, double s);
};

/// Two-point function K(t_j; y, z) = values[j](y, z) * exp(log_scale[j]).
struct TwoPointField {
    std::vector<double> times;
    SpaceGrid grid;
    std::vector<double> log_scale;
    std::vector<Eigen::MatrixXd> values;
    MomentMethod method = MomentMethod::time_stepping;
    double valid_from = 0.0;
    double growth_rate = 0.0;
    int steps = 0;

    /// The diagonal K(t; x, x) as a MomentField.
    MomentField diagonal() const;
};

/// Numerical controls of the Volterra solvers.
struct VolterraOptions {
    bool subgrid = true;               ///< add the closure for modes above the grid cutoff
    bool allow_asymptotic = true;      ///< switch to dominant-pole asymptotics when r* T is large
    double asymptotic_threshold = 30;  ///< r* T above which the asymptotic regime is used
    double max_rate_step = 0.05;       ///< refine the time step until r* dt <= this value
    int max_refinement = 8;            ///< cap on the refinement factor of nt
};

/// White-noise second moment for sigma(u) = l_sigma u:
/// M(t,x) = (G_B u0)_t(x)^2 + lambda^2 l^2 int_0^t int_B G_B(t-s,x,y)^2 M(s,y) dy ds.
MomentField second_moment_white(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0,
                                double l_sigma, double T, int nt, const VolterraOptions& opt = {});

/// Riesz-noise two-point function K(t;y,z) for sigma(u) = l_sigma u (grid size n <= 48).
TwoPointField second_moment_colored(const ModelParams& params, const EigenSystem& es, const Eigen::VectorXd& u0,
                                    double l_sigma, double gamma, double T, int nt, const VolterraOptions& opt = {});

/// Largest grid accepted by second_moment_colored.
inline constexpr int kMaxColoredGrid = 48;

// --- renewal machinery and lower-bound series --------------------------------------------------

/// Equality case f(t) = c1 + kappa int_0^t (t-s)^{rho-1} f(s) ds by product integration on a
/// graded mesh (grading max(1, 2/rho)).
SampledFunction renewal_volterra_solve(double c1, double kappa, double rho, double T, int nt);

/// (Gamma(rho) kappa)^{1/rho}.
double renewal_growth_exponent(double kappa, double rho);

/// S(t) = sum_{k>=1} (t / k^rho)^k; +inf when it exceeds the double range.
double lower_series(double t, double rho);
/// log S(t), summed in log space around the maximising index.
double log_lower_series(double t, double rho);

/// g_t^2 (1 + sum_{k>=1} (lambda^2 l^2 c1)^k (t/k)^{k (alpha - gamma beta)/alpha}), returned as a log.
/// c1 is the fitted kernel-floor constant (see colored_floor_constant).
double log_colored_lower_bound_series(const ModelParams& params, double gamma, double l_sigma, double lambda,
                                      double t, double g_t, double c1);
double colored_lower_bound_series(const ModelParams& params, double gamma, double l_sigma, double lambda, double t,
                                  double g_t, double c1);

/// c1 fitted from the kernel floor: the squared floor constant C of kernel_floor.
double colored_floor_constant(const KernelFloor& floor);

struct InitialFloor {
    double value = 0.0;
    bool zero_data = false;  ///< u0 vanishes on the grid
};

/// inf over s <= t (64 grid times) and |x| < R - epsilon of (G_B u0)_{s + t0}(x).
InitialFloor initial_term_floor(const EigenSystem& es, double beta, const Eigen::VectorXd& u0, double epsilon,
                                double t, double t0);

}  // namespace fracstorm
