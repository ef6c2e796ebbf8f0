#ifndef CMCHAIN_MODEL_HPP
#define CMCHAIN_MODEL_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>

#include "cmchain/errors.hpp"

namespace cmchain {

enum class TrapKind { None, CommonTrap, SitePinning };
enum class InteractionKind { None, NearestNeighbor, AllToAll };
enum class ScalingPreset { Bare, AssumptionPreserving };

struct TrapSpec {
    TrapKind kind = TrapKind::CommonTrap;
    double frequency = 1.0;          // nu, CommonTrap only
    double pinning_stiffness = 1.0;  // k_pin, SitePinning only
};

struct InteractionSpec {
    InteractionKind kind = InteractionKind::NearestNeighbor;
    double coupling_g = 1.0;
    double base_stiffness = 1.0;  // kappa0
};

/// Declarative description of an N-particle harmonic chain.
struct SystemSpec {
    int n_particles = 1;
    double hbar = 1.0;
    double total_mass = 1.0;
    Eigen::VectorXd bare_masses;  // empty means all equal
    TrapSpec trap;
    InteractionSpec interaction;
    ScalingPreset scaling_preset = ScalingPreset::Bare;
    double extent = 1.0;  // lattice span for pinning centers
};

/// Assembled quadratic Hamiltonian: renormalized masses, symmetric
/// stiffness, equilibrium centers and center-of-mass weights.
struct QuadraticModel {
    Eigen::VectorXd masses;     // renormalized, sums to total_mass exactly
    Eigen::SparseMatrix<double> stiffness;
    Eigen::VectorXd centers;    // equilibrium positions
    Eigen::VectorXd weights;    // m_i / M
    double hbar = 1.0;
    double total_mass = 1.0;
    double stiffness_scale = 1.0;  // 1 (Bare) or n (AssumptionPreserving)
    TrapSpec trap;
    InteractionSpec interaction;

    int size() const { return static_cast<int>(masses.size()); }
    Eigen::MatrixXd dense_stiffness() const { return Eigen::MatrixXd(stiffness); }
};

struct ModelDiagnostics {
    double symmetry_defect = 0.0;
    double mass_sum_residual = 0.0;
    double min_eigenvalue = 0.0;
    bool positive_definite = false;
    double kohn_residual = -1.0;  // <0 when not applicable
    std::string null_space;       // non-empty when a zero mode was found
};

/// m_i' = M * bare_i / sum(bare); exact normalization, sum m_i' == M.
Eigen::VectorXd renormalize_masses(const Eigen::VectorXd& bare, double total_mass);

QuadraticModel build_model(const SystemSpec& spec);

ModelDiagnostics validate(const QuadraticModel& model);

/// True when the pair term leaves the uniform translation invariant
/// (the trap alone then fixes the CM mode frequency).
bool translation_invariant_interaction(const QuadraticModel& model);

/// Parse the [system] section of a key-value config file.
SystemSpec load_system_spec(const std::string& path);

std::string to_string(TrapKind k);
std::string to_string(InteractionKind k);
std::string to_string(ScalingPreset p);

}  // namespace cmchain

#endif  // CMCHAIN_MODEL_HPP
