#include "cmchain/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <limits>

#include "cmchain/gaussian.hpp"

namespace cmchain {

namespace {

constexpr long kMaxGridSize = 1L << 22;
constexpr int kDenseLimit = 10000;

struct Grid {
    int n = 1;           // particles
    int pts = 0;         // per axis
    long dim = 0;        // pts^n
    double h = 0.0;
    std::array<long, 3> stride{};
    Eigen::MatrixXd coords;  // n x pts, coordinate of particle i at index j
    Eigen::VectorXd potential;
    Eigen::VectorXd kinetic_coeff;  // hbar^2 / (2 m_i h^2)
};

Grid make_grid(const QuadraticModel& model, const GridSpec& spec) {
    if (spec.n_particles < 1 || spec.n_particles > 3)
        throw InvalidSpecError("grid oracle: n_particles must be 1..3");
    if (spec.points_per_axis < 32)
        throw InvalidSpecError("grid oracle: need at least 32 points per axis");
    if (spec.box_halfwidth <= 0.0)
        throw InvalidSpecError("grid oracle: box halfwidth must be positive");
    if (model.size() != spec.n_particles)
        throw InvalidSpecError("grid oracle: model/grid particle count mismatch");

    Grid g;
    g.n = spec.n_particles;
    g.pts = spec.points_per_axis;
    g.dim = 1;
    for (int i = 0; i < g.n; ++i) {
        g.stride[i] = g.dim;
        g.dim *= g.pts;
    }
    if (g.dim > kMaxGridSize)
        throw InvalidSpecError("grid oracle: total grid size exceeds 2^22 points");

    g.h = 2.0 * spec.box_halfwidth / (g.pts - 1);
    g.coords.resize(g.n, g.pts);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.pts; ++j)
            g.coords(i, j) = model.centers[i] - spec.box_halfwidth + j * g.h;

    const Eigen::MatrixXd stiffness = model.dense_stiffness();
    g.potential.resize(g.dim);
    std::array<int, 3> idx{};
    for (long flat = 0; flat < g.dim; ++flat) {
        long rem = flat;
        for (int i = 0; i < g.n; ++i) {
            idx[i] = static_cast<int>(rem % g.pts);
            rem /= g.pts;
        }
        double v = 0.0;
        for (int a = 0; a < g.n; ++a) {
            const double da = g.coords(a, idx[a]) - model.centers[a];
            for (int b = 0; b < g.n; ++b) {
                const double db = g.coords(b, idx[b]) - model.centers[b];
                v += 0.5 * stiffness(a, b) * da * db;
            }
        }
        g.potential[flat] = v;
    }

    g.kinetic_coeff.resize(g.n);
    for (int i = 0; i < g.n; ++i)
        g.kinetic_coeff[i] = model.hbar * model.hbar / (2.0 * model.masses[i] * g.h * g.h);
    return g;
}

// Dirichlet boundaries: the wavefunction vanishes outside the box.
void apply_hamiltonian(const Grid& g, const Eigen::VectorXd& psi, Eigen::VectorXd& out) {
    out = g.potential.cwiseProduct(psi);
    for (int i = 0; i < g.n; ++i) {
        const long s = g.stride[i];
        const double t = g.kinetic_coeff[i];
        const long block = s * g.pts;
        for (long base = 0; base < g.dim; base += block) {
            for (long off = 0; off < s; ++off) {
                for (int j = 0; j < g.pts; ++j) {
                    const long flat = base + off + static_cast<long>(j) * s;
                    double lap = 2.0 * psi[flat];
                    if (j > 0) lap -= psi[flat - s];
                    if (j + 1 < g.pts) lap -= psi[flat + s];
                    out[flat] += t * lap;
                }
            }
        }
    }
}

/// Jacobi-preconditioned CG for H z = b; H is SPD for bound models.
void solve_cg(const Grid& g, const Eigen::VectorXd& b, Eigen::VectorXd& z,
              double rel_tol, int max_iter) {
    Eigen::VectorXd diag = g.potential;
    for (int i = 0; i < g.n; ++i) diag.array() += 2.0 * g.kinetic_coeff[i];
    const Eigen::ArrayXd inv_diag = diag.array().inverse();

    Eigen::VectorXd r = b, tmp(g.dim);
    apply_hamiltonian(g, z, tmp);
    r -= tmp;
    Eigen::VectorXd y = (inv_diag * r.array()).matrix();
    Eigen::VectorXd p = y;
    double rz = r.dot(y);
    const double b_norm = b.norm();
    for (int it = 0; it < max_iter; ++it) {
        if (r.norm() <= rel_tol * b_norm) break;
        apply_hamiltonian(g, p, tmp);
        const double alpha = rz / p.dot(tmp);
        z += alpha * p;
        r -= alpha * tmp;
        y = (inv_diag * r.array()).matrix();
        const double rz_new = r.dot(y);
        p = y + (rz_new / rz) * p;
        rz = rz_new;
    }
}

void lowest_pair(const Grid& g, Eigen::VectorXd& psi, double& energy, int& iterations,
                 double& residual) {
    if (g.dim <= kDenseLimit) {
        Eigen::MatrixXd h_dense = Eigen::MatrixXd::Zero(g.dim, g.dim);
        Eigen::VectorXd unit = Eigen::VectorXd::Zero(g.dim), col(g.dim);
        for (long c = 0; c < g.dim; ++c) {
            unit[c] = 1.0;
            apply_hamiltonian(g, unit, col);
            h_dense.col(c) = col;
            unit[c] = 0.0;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_dense);
        energy = es.eigenvalues()[0];
        psi = es.eigenvectors().col(0);
        if (psi.sum() < 0) psi = -psi;
        iterations = 0;
        residual = 0.0;
        return;
    }

    psi = Eigen::VectorXd::Ones(g.dim);
    psi /= psi.norm();
    Eigen::VectorXd hpsi(g.dim), z(g.dim);
    double lambda_prev = std::numeric_limits<double>::infinity();
    const int max_outer = 200;
    for (iterations = 1; iterations <= max_outer; ++iterations) {
        z = psi;  // warm start near the current iterate
        solve_cg(g, psi, z, 1e-10, 20000);
        psi = z / z.norm();
        apply_hamiltonian(g, psi, hpsi);
        energy = psi.dot(hpsi);
        residual = (hpsi - energy * psi).norm() / energy;
        if (std::abs(energy - lambda_prev) <= 1e-12 * energy && residual <= 1e-6)
            return;
        lambda_prev = energy;
    }
    throw OracleFailureError("grid oracle: inverse iteration did not converge", residual);
}

}  // namespace

GridGroundState grid_ground_state(const QuadraticModel& model, const GridSpec& spec) {
    Grid g = make_grid(model, spec);

    GridGroundState out;
    Eigen::VectorXd psi;
    lowest_pair(g, psi, out.energy, out.iterations, out.residual);

    // Observables from |psi|^2; psi carries unit discrete norm.
    out.means = Eigen::VectorXd::Zero(g.n);
    out.covariance = Eigen::MatrixXd::Zero(g.n, g.n);
    std::array<int, 3> idx{};
    for (long flat = 0; flat < g.dim; ++flat) {
        long rem = flat;
        for (int i = 0; i < g.n; ++i) {
            idx[i] = static_cast<int>(rem % g.pts);
            rem /= g.pts;
        }
        const double w = psi[flat] * psi[flat];
        for (int i = 0; i < g.n; ++i) out.means[i] += w * g.coords(i, idx[i]);
    }
    for (long flat = 0; flat < g.dim; ++flat) {
        long rem = flat;
        for (int i = 0; i < g.n; ++i) {
            idx[i] = static_cast<int>(rem % g.pts);
            rem /= g.pts;
        }
        const double w = psi[flat] * psi[flat];
        for (int a = 0; a < g.n; ++a) {
            const double da = g.coords(a, idx[a]) - out.means[a];
            for (int b = a; b < g.n; ++b) {
                const double db = g.coords(b, idx[b]) - out.means[b];
                out.covariance(a, b) += w * da * db;
            }
        }
    }
    for (int a = 0; a < g.n; ++a)
        for (int b = 0; b < a; ++b) out.covariance(a, b) = out.covariance(b, a);
    out.variances = out.covariance.diagonal();
    out.cm_variance = model.weights.dot(out.covariance * model.weights);

    // <P^2> of the total momentum via fourth-order gradient stencils so the
    // estimator does not dominate the O(h^2) eigenfunction error; the real
    // ground state has <P> = 0.
    double p2 = 0.0;
    for (long flat = 0; flat < g.dim; ++flat) {
        long rem = flat;
        for (int i = 0; i < g.n; ++i) {
            idx[i] = static_cast<int>(rem % g.pts);
            rem /= g.pts;
        }
        double grad_sum = 0.0;
        for (int i = 0; i < g.n; ++i) {
            auto at = [&](int off) -> double {
                const int j = idx[i] + off;
                return (j >= 0 && j < g.pts) ? psi[flat + off * g.stride[i]] : 0.0;
            };
            grad_sum += (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * g.h);
        }
        p2 += grad_sum * grad_sum;
    }
    out.cm_momentum_variance = model.hbar * model.hbar * p2;
    out.wavefunction = std::move(psi);
    out.grid_spacing = g.h;
    return out;
}

CrosscheckReport crosscheck(const QuadraticModel& model, const GridSpec& grid,
                            double tolerance) {
    GridGroundState oracle = grid_ground_state(model, grid);

    NormalModes modes = normal_modes(model);
    GaussianState gs = ground_state(model);
    CMObservables cm = cm_observables(gs, model);
    const double engine_energy = 0.5 * model.hbar * modes.frequencies.sum();

    CrosscheckReport report;
    report.tolerance = tolerance;
    auto add = [&](const std::string& name, double engine, double value) {
        CrosscheckRow row;
        row.name = name;
        row.engine = engine;
        row.oracle = value;
        row.rel_error = std::abs(engine - value) / std::max(std::abs(engine), 1e-300);
        row.pass = row.rel_error <= tolerance;
        report.rows.push_back(row);
    };
    add("energy", engine_energy, oracle.energy);
    add("var_x_cm", cm.var_x, oracle.cm_variance);
    add("var_p_cm", cm.var_p, oracle.cm_momentum_variance);
    if (model.size() >= 2)
        add("pair_correlation", gs.sigma_xx()(0, 1), oracle.covariance(0, 1));

    report.pass = true;
    for (const auto& row : report.rows) report.pass = report.pass && row.pass;
    return report;
}

}  // namespace cmchain
