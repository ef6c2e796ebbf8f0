#ifndef CMCHAIN_GAUSSIAN_HPP
#define CMCHAIN_GAUSSIAN_HPP

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <optional>

#include "cmchain/model.hpp"

namespace cmchain {

/// Spectral decomposition of the dynamical matrix M^{-1/2} K M^{-1/2}.
/// Frequencies ascend; each column's largest-magnitude entry is positive.
struct NormalModes {
    Eigen::VectorXd frequencies;
    Eigen::MatrixXd mode_matrix;
};

/// Mean vector (positions then momenta) and full 2n x 2n covariance.
struct GaussianState {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    double hbar = 1.0;

    int size() const { return static_cast<int>(mean.size()) / 2; }
    Eigen::VectorXd mean_x() const { return mean.head(size()); }
    Eigen::VectorXd mean_p() const { return mean.tail(size()); }
    Eigen::MatrixXd sigma_xx() const { return covariance.topLeftCorner(size(), size()); }
    Eigen::MatrixXd sigma_xp() const { return covariance.topRightCorner(size(), size()); }
    Eigen::MatrixXd sigma_pp() const { return covariance.bottomRightCorner(size(), size()); }
};

/// Center-of-mass observables of one state.
struct CMObservables {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = 0.0;
    double var_p = 0.0;
    double uncertainty_product = 0.0;
    std::map<int, double> moment_gaps;                 // order -> |<X^n> - <X>^n|
    std::optional<double> correlation_length;          // nullopt when not applicable
    double single_particle_var_max = 0.0;
};

NormalModes normal_modes(const QuadraticModel& model);

GaussianState ground_state(const QuadraticModel& model);

CMObservables cm_observables(const GaussianState& state, const QuadraticModel& model);

/// |<X^n> - <X>^n| for the scalar Gaussian X ~ N(mean, variance), Wick closed form.
double gaussian_moment_gap(double mean, double variance, int order);
double central_moment_gap(const GaussianState& state, const QuadraticModel& model, int order);

/// <exp(i(alpha X_cm + beta P_cm))>.
std::complex<double> characteristic_fn(const GaussianState& state,
                                       const QuadraticModel& model, double alpha,
                                       double beta);

/// Mass-weighted probability of finding particles in [a, b]; per-particle
/// Gaussian marginals, exact tail evaluation. Infinite bounds allowed.
double gaussian_interval_mass(const Eigen::VectorXd& means,
                              const Eigen::VectorXd& variances,
                              const Eigen::VectorXd& weights, double a, double b);
double mass_fraction_in_interval(const GaussianState& state, const QuadraticModel& model,
                                 double a, double b);

/// Williamson symplectic spectrum, ascending. All hbar/2 for pure states.
Eigen::VectorXd symplectic_eigenvalues(const GaussianState& state);

/// <H> for the model's quadratic Hamiltonian.
double mean_energy(const QuadraticModel& model, const GaussianState& state);

/// Ground-state CM observables plus per-site position variances. Dense
/// eigendecomposition for small systems; banded chains above the threshold
/// go through a Lanczos matrix-function route that never materializes the
/// covariance (required to sweep n ~ 10^4).
struct GroundSummary {
    CMObservables cm;
    Eigen::VectorXd site_variances;
};
struct GroundSummaryOptions {
    int dense_threshold = 600;
    int probe_stride = 64;  // diag-probing distance on the Lanczos route
};
GroundSummary ground_summary(const QuadraticModel& model,
                             const GroundSummaryOptions& opts = {});

}  // namespace cmchain

#endif  // CMCHAIN_GAUSSIAN_HPP
