#ifndef CMCHAIN_DYNAMICS_HPP
#define CMCHAIN_DYNAMICS_HPP

#include <ostream>
#include <vector>

#include "cmchain/gaussian.hpp"
#include "cmchain/model.hpp"

namespace cmchain {

struct ClassicalPoint {
    double x = 0.0;
    double p = 0.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> cm_mean_x;
    std::vector<double> cm_mean_p;
    std::vector<double> energy;
    std::vector<double> var_x;  // may be empty (classical runs)
};

/// Phase-space displacement of the whole chain: translate every position by
/// x, boost total momentum by p (mass-weighted); covariance untouched.
GaussianState displace(const GaussianState& state, const QuadraticModel& model,
                       double x, double p);

/// Exact normal-mode propagator; no discretization error. Build once,
/// evolve to any t.
class Propagator {
public:
    explicit Propagator(const QuadraticModel& model);
    GaussianState evolve(const GaussianState& state, double t) const;

private:
    NormalModes modes_;
    Eigen::VectorXd sqrt_m_, inv_sqrt_m_, centers_;
};

GaussianState evolve_exact(const QuadraticModel& model, const GaussianState& state,
                           double t);

/// Quadratic CM reduction of the model's trap: V(x) = k/2 (x - center)^2.
struct CmPotential {
    double stiffness = 0.0;
    double center = 0.0;
};
CmPotential cm_potential(const QuadraticModel& model);

/// Symplectic classical reference trajectory recorded at the given grid
/// times. Composition of velocity-Verlet substeps (Yoshida 6th order) so
/// long-horizon phase error stays far below the exact-propagation budget.
Trajectory classical_trajectory(double mass, const CmPotential& potential,
                                ClassicalPoint start, const std::vector<double>& t_grid,
                                double dt);

struct EhrenfestReport {
    double max_mean_deviation = 0.0;      // max |quantum CM mean - classical|, both x and p
    double var_constancy_defect = 0.0;    // relative drift of quantum var_x(t)
    double quantum_energy_residual = 0.0; // relative |<H>(t) - <H>(0)|
    double classical_energy_drift = 0.0;  // relative max |E(t) - E(0)| on the grid
    Trajectory quantum;
    Trajectory classical;
};

/// Exact quantum evolution of the displaced ground state against the
/// classical integrator; CommonTrap only (exact CM decoupling).
EhrenfestReport ehrenfest_compare(const QuadraticModel& model, ClassicalPoint start,
                                  const std::vector<double>& t_grid, double dt);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace cmchain

#endif  // CMCHAIN_DYNAMICS_HPP
