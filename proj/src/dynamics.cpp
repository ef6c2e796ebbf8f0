#include "cmchain/dynamics.hpp"

#include <cmath>

#include "cmchain/format.hpp"

namespace cmchain {

GaussianState displace(const GaussianState& state, const QuadraticModel& model,
                       double x, double p) {
    const int n = state.size();
    if (n != model.size())
        throw InvalidSpecError("displace: state/model dimension mismatch");
    GaussianState out = state;
    out.mean.head(n).array() += x;
    out.mean.tail(n) += p * model.weights;
    return out;
}

Propagator::Propagator(const QuadraticModel& model)
    : modes_(normal_modes(model)),
      sqrt_m_(model.masses.array().sqrt().matrix()),
      inv_sqrt_m_(model.masses.array().rsqrt().matrix()),
      centers_(model.centers) {}

GaussianState Propagator::evolve(const GaussianState& state, double t) const {
    const int n = static_cast<int>(sqrt_m_.size());
    const Eigen::ArrayXd wt = modes_.frequencies.array() * t;
    const Eigen::VectorXd c = wt.cos().matrix();
    const Eigen::VectorXd s = wt.sin().matrix();
    const Eigen::MatrixXd& u = modes_.mode_matrix;

    Eigen::MatrixXd block(2 * n, 2 * n);
    block.topLeftCorner(n, n) =
        inv_sqrt_m_.asDiagonal() * (u * c.asDiagonal() * u.transpose()) *
        sqrt_m_.asDiagonal();
    block.topRightCorner(n, n) =
        inv_sqrt_m_.asDiagonal() *
        (u * (s.array() / modes_.frequencies.array()).matrix().asDiagonal() *
         u.transpose()) *
        inv_sqrt_m_.asDiagonal();
    block.bottomLeftCorner(n, n) =
        sqrt_m_.asDiagonal() *
        (u * (-s.array() * modes_.frequencies.array()).matrix().asDiagonal() *
         u.transpose()) *
        sqrt_m_.asDiagonal();
    block.bottomRightCorner(n, n) =
        sqrt_m_.asDiagonal() * (u * c.asDiagonal() * u.transpose()) *
        inv_sqrt_m_.asDiagonal();

    GaussianState out;
    out.hbar = state.hbar;
    Eigen::VectorXd rel = state.mean;
    rel.head(n) -= centers_;
    out.mean = block * rel;
    out.mean.head(n) += centers_;
    out.covariance = block * state.covariance * block.transpose();
    return out;
}

GaussianState evolve_exact(const QuadraticModel& model, const GaussianState& state,
                           double t) {
    return Propagator(model).evolve(state, t);
}

CmPotential cm_potential(const QuadraticModel& model) {
    CmPotential pot;
    pot.center = model.weights.dot(model.centers);
    // 1'K1: the interaction Laplacian cancels, leaving the trap stiffness.
    for (int k = 0; k < model.stiffness.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(model.stiffness, k); it; ++it)
            pot.stiffness += it.value();
    return pot;
}

namespace {

// Yoshida 6th-order composition weights (solution A).
constexpr double kW1 = -1.17767998417887;
constexpr double kW2 = 0.235573213359357;
constexpr double kW3 = 0.784513610477560;
constexpr double kW0 = 1.0 - 2.0 * (kW1 + kW2 + kW3);
constexpr double kWeights[7] = {kW3, kW2, kW1, kW0, kW1, kW2, kW3};

inline void verlet_substep(double h, double mass, const CmPotential& pot, double& x,
                           double& p) {
    p -= 0.5 * h * pot.stiffness * (x - pot.center);
    x += h * p / mass;
    p -= 0.5 * h * pot.stiffness * (x - pot.center);
}

inline void yoshida_step(double h, double mass, const CmPotential& pot, double& x,
                         double& p) {
    for (double w : kWeights) verlet_substep(w * h, mass, pot, x, p);
}

}  // namespace

Trajectory classical_trajectory(double mass, const CmPotential& potential,
                                ClassicalPoint start, const std::vector<double>& t_grid,
                                double dt) {
    if (dt <= 0.0) throw InvalidSpecError("classical_trajectory: dt must be positive");
    if (t_grid.empty())
        throw InvalidSpecError("classical_trajectory: empty time grid");
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
        if (!(t_grid[i] < t_grid[i + 1]))
            throw InvalidSpecError("classical_trajectory: times must strictly increase");
    if (t_grid.front() < 0.0)
        throw InvalidSpecError("classical_trajectory: times must be non-negative");

    Trajectory traj;
    double x = start.x, p = start.p, tc = 0.0;
    for (double t : t_grid) {
        const double span = t - tc;
        if (span > 0.0) {
            const int steps = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-12)));
            const double h = span / steps;
            for (int k = 0; k < steps; ++k) yoshida_step(h, mass, potential, x, p);
            tc = t;
        }
        traj.times.push_back(t);
        traj.cm_mean_x.push_back(x);
        traj.cm_mean_p.push_back(p);
        const double dx = x - potential.center;
        traj.energy.push_back(0.5 * p * p / mass + 0.5 * potential.stiffness * dx * dx);
    }
    return traj;
}

EhrenfestReport ehrenfest_compare(const QuadraticModel& model, ClassicalPoint start,
                                  const std::vector<double>& t_grid, double dt) {
    if (model.trap.kind != TrapKind::CommonTrap)
        throw UnsupportedScenarioError(
            "ehrenfest_compare: only CommonTrap models have an autonomous CM");

    const int n = model.size();
    const GaussianState gs = ground_state(model);
    const GaussianState st0 = displace(gs, model, start.x, start.p);
    const Propagator prop(model);

    EhrenfestReport report;
    Trajectory& q = report.quantum;
    for (double t : t_grid) {
        GaussianState st = prop.evolve(st0, t);
        q.times.push_back(t);
        q.cm_mean_x.push_back(model.weights.dot(st.mean.head(n)));
        q.cm_mean_p.push_back(st.mean.tail(n).sum());
        q.var_x.push_back(model.weights.dot(st.sigma_xx() * model.weights));
        q.energy.push_back(mean_energy(model, st));
    }

    const double cm0_x = model.weights.dot(gs.mean.head(n));
    const double cm0_p = gs.mean.tail(n).sum();
    report.classical =
        classical_trajectory(model.total_mass, cm_potential(model),
                             {cm0_x + start.x, cm0_p + start.p}, t_grid, dt);

    const std::size_t m = t_grid.size();
    const double e0_q = q.energy.front();
    const double e0_c = report.classical.energy.front();
    const double e0_c_denom = std::abs(e0_c) > 0.0 ? std::abs(e0_c) : 1.0;
    const double var0 = q.var_x.front();
    for (std::size_t i = 0; i < m; ++i) {
        report.max_mean_deviation = std::max(
            {report.max_mean_deviation,
             std::abs(q.cm_mean_x[i] - report.classical.cm_mean_x[i]),
             std::abs(q.cm_mean_p[i] - report.classical.cm_mean_p[i])});
        report.var_constancy_defect =
            std::max(report.var_constancy_defect, std::abs(q.var_x[i] - var0) / var0);
        report.quantum_energy_residual =
            std::max(report.quantum_energy_residual,
                     std::abs(q.energy[i] - e0_q) / std::abs(e0_q));
        report.classical_energy_drift =
            std::max(report.classical_energy_drift,
                     std::abs(report.classical.energy[i] - e0_c) / e0_c_denom);
    }
    return report;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,x_cm,p_cm,energy,var_x\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out << fmt17(traj.times[i]) << ',' << fmt17(traj.cm_mean_x[i]) << ','
            << fmt17(traj.cm_mean_p[i]) << ',' << fmt17(traj.energy[i]) << ','
            << (i < traj.var_x.size() ? fmt17(traj.var_x[i]) : "nan") << '\n';
    }
}

}  // namespace cmchain
