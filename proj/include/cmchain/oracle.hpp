#ifndef CMCHAIN_ORACLE_HPP
#define CMCHAIN_ORACLE_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cmchain/model.hpp"

namespace cmchain {

/// Real-space tensor grid for the brute-force ground-state solver.
struct GridSpec {
    int points_per_axis = 128;
    double box_halfwidth = 8.0;  // per axis, around each equilibrium center
    int n_particles = 1;
};

struct GridGroundState {
    double energy = 0.0;
    Eigen::VectorXd means;
    Eigen::VectorXd variances;
    Eigen::MatrixXd covariance;        // position covariance, n x n
    double cm_variance = 0.0;          // w' Cov w
    double cm_momentum_variance = 0.0; // <P^2> - <P>^2 of the total momentum
    int iterations = 0;
    double residual = 0.0;
    Eigen::VectorXd wavefunction;  // unit discrete norm, row-major axis 0 fastest
    double grid_spacing = 0.0;
};

/// Second-order central differences; lowest eigenpair by dense solve below
/// 10^4 grid points and inverse power iteration (shift 0, CG inner solves,
/// all-ones start) above. Independent of the Gaussian engine.
GridGroundState grid_ground_state(const QuadraticModel& model, const GridSpec& grid);

struct CrosscheckRow {
    std::string name;
    double engine = 0.0;
    double oracle = 0.0;
    double rel_error = 0.0;
    bool pass = false;
};
struct CrosscheckReport {
    std::vector<CrosscheckRow> rows;
    double tolerance = 1e-4;
    bool pass = false;
};

/// Engine-vs-oracle relative errors for energy, CM variances and the
/// nearest pair correlation.
CrosscheckReport crosscheck(const QuadraticModel& model, const GridSpec& grid,
                            double tolerance = 1e-4);

}  // namespace cmchain

#endif  // CMCHAIN_ORACLE_HPP
