#include "cmchain/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "cmchain/lanczos.hpp"

namespace cmchain {

Eigen::VectorXd renormalize_masses(const Eigen::VectorXd& bare, double total_mass) {
    if (bare.size() == 0)
        throw InvalidSpecError("renormalize_masses: empty bare mass list");
    if (total_mass <= 0.0)
        throw InvalidSpecError("renormalize_masses: total mass must be positive");
    if ((bare.array() <= 0.0).any())
        throw InvalidSpecError("renormalize_masses: all bare masses must be positive");
    return total_mass * bare / bare.sum();
}

namespace {

void check_spec(const SystemSpec& spec) {
    if (spec.n_particles < 1)
        throw InvalidSpecError("SystemSpec: n_particles must be >= 1");
    if (spec.hbar <= 0.0) throw InvalidSpecError("SystemSpec: hbar must be positive");
    if (spec.total_mass <= 0.0)
        throw InvalidSpecError("SystemSpec: total_mass must be positive");
    if (spec.extent <= 0.0) throw InvalidSpecError("SystemSpec: extent must be positive");
    if (spec.bare_masses.size() != 0 && spec.bare_masses.size() != spec.n_particles)
        throw InvalidSpecError("SystemSpec: bare_masses length must equal n_particles");
    if (spec.trap.kind == TrapKind::CommonTrap && spec.trap.frequency <= 0.0)
        throw InvalidSpecError("SystemSpec: trap frequency must be positive");
    if (spec.trap.kind == TrapKind::SitePinning && spec.trap.pinning_stiffness <= 0.0)
        throw InvalidSpecError("SystemSpec: pinning stiffness must be positive");
    if (spec.interaction.coupling_g < 0.0)
        throw InvalidSpecError("SystemSpec: coupling g must be non-negative");
    if (spec.interaction.base_stiffness <= 0.0)
        throw InvalidSpecError("SystemSpec: base stiffness kappa0 must be positive");
}

}  // namespace

QuadraticModel build_model(const SystemSpec& spec) {
    check_spec(spec);
    const int n = spec.n_particles;

    if (spec.trap.kind == TrapKind::None)
        throw SingularModelError(
            "build_model: no trap leaves a translation zero mode",
            "uniform vector (rigid translation of the whole chain)");

    QuadraticModel model;
    Eigen::VectorXd bare = spec.bare_masses.size() == n
                               ? spec.bare_masses
                               : Eigen::VectorXd::Ones(n);
    model.masses = renormalize_masses(bare, spec.total_mass);
    model.weights = model.masses / spec.total_mass;
    model.hbar = spec.hbar;
    model.total_mass = spec.total_mass;
    model.trap = spec.trap;
    model.interaction = spec.interaction;
    model.stiffness_scale =
        spec.scaling_preset == ScalingPreset::AssumptionPreserving ? double(n) : 1.0;

    // Equilibrium centers: lattice over [-L/2, L/2] for pinning, origin otherwise.
    model.centers = Eigen::VectorXd::Zero(n);
    if (spec.trap.kind == TrapKind::SitePinning && n > 1) {
        const double spacing = spec.extent / double(n - 1);
        for (int i = 0; i < n; ++i) model.centers[i] = -0.5 * spec.extent + i * spacing;
    }

    std::vector<Eigen::Triplet<double>> trip;
    const double gk = spec.interaction.coupling_g * spec.interaction.base_stiffness;
    switch (spec.interaction.kind) {
        case InteractionKind::None:
            break;
        case InteractionKind::NearestNeighbor:
            trip.reserve(3 * n);
            for (int i = 0; i + 1 < n; ++i) {
                trip.emplace_back(i, i, gk);
                trip.emplace_back(i + 1, i + 1, gk);
                trip.emplace_back(i, i + 1, -gk);
                trip.emplace_back(i + 1, i, -gk);
            }
            break;
        case InteractionKind::AllToAll:
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    trip.emplace_back(i, j, i == j ? gk * double(n - 1) : -gk);
            break;
    }
    for (int i = 0; i < n; ++i) {
        const double diag = spec.trap.kind == TrapKind::CommonTrap
                                ? model.masses[i] * spec.trap.frequency * spec.trap.frequency
                                : spec.trap.pinning_stiffness;
        trip.emplace_back(i, i, diag);
    }

    model.stiffness.resize(n, n);
    model.stiffness.setFromTriplets(trip.begin(), trip.end());
    if (model.stiffness_scale != 1.0) model.stiffness *= model.stiffness_scale;
    model.stiffness.makeCompressed();
    return model;
}

bool translation_invariant_interaction(const QuadraticModel& model) {
    return model.interaction.kind == InteractionKind::NearestNeighbor ||
           model.interaction.kind == InteractionKind::AllToAll ||
           model.interaction.kind == InteractionKind::None ||
           model.interaction.coupling_g == 0.0;
}

ModelDiagnostics validate(const QuadraticModel& model) {
    ModelDiagnostics diag;
    const int n = model.size();

    Eigen::SparseMatrix<double> defect = Eigen::SparseMatrix<double>(
        model.stiffness - Eigen::SparseMatrix<double>(model.stiffness.transpose()));
    diag.symmetry_defect = 0.0;
    for (int k = 0; k < defect.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(defect, k); it; ++it)
            diag.symmetry_defect = std::max(diag.symmetry_defect, std::abs(it.value()));

    diag.mass_sum_residual =
        std::abs(model.masses.sum() - model.total_mass) / model.total_mass;

    // Dynamical matrix spectrum edge. Dense for small systems, Lanczos above.
    const Eigen::ArrayXd inv_sqrt_m = model.masses.array().rsqrt();
    auto dyn_matvec = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd y = (inv_sqrt_m * x.array()).matrix();
        y = model.stiffness * y;
        return (inv_sqrt_m * y.array()).matrix();
    };
    if (n <= 1024) {
        Eigen::MatrixXd dyn = inv_sqrt_m.matrix().asDiagonal() * model.dense_stiffness() *
                              inv_sqrt_m.matrix().asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dyn, Eigen::EigenvaluesOnly);
        diag.min_eigenvalue = es.eigenvalues()[0];
    } else {
        diag.min_eigenvalue = lanczos_min_eigenvalue(dyn_matvec, n);
    }
    // Scale-aware zero-mode test: compare against the spectral magnitude.
    double scale_ref = 0.0;
    for (int k = 0; k < model.stiffness.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(model.stiffness, k); it; ++it)
            scale_ref = std::max(scale_ref, std::abs(it.value()) * inv_sqrt_m[it.row()] *
                                                inv_sqrt_m[it.col()]);
    diag.positive_definite = diag.min_eigenvalue > 1e-12 * std::max(scale_ref, 1.0);
    if (!diag.positive_definite && model.trap.kind == TrapKind::None)
        diag.null_space = "uniform vector (rigid translation of the whole chain)";

    if (model.trap.kind == TrapKind::CommonTrap && translation_invariant_interaction(model)) {
        // Kohn mode: mass-weighted uniform vector, eigenvalue scale * nu^2.
        Eigen::VectorXd v = model.masses.array().sqrt().matrix();
        v /= v.norm();
        const double lambda =
            model.stiffness_scale * model.trap.frequency * model.trap.frequency;
        diag.kohn_residual = (dyn_matvec(v) - lambda * v).norm() / lambda;
    }
    return diag;
}

std::string to_string(TrapKind k) {
    switch (k) {
        case TrapKind::None: return "none";
        case TrapKind::CommonTrap: return "common";
        case TrapKind::SitePinning: return "pinning";
    }
    return "?";
}

std::string to_string(InteractionKind k) {
    switch (k) {
        case InteractionKind::None: return "none";
        case InteractionKind::NearestNeighbor: return "nn";
        case InteractionKind::AllToAll: return "all";
    }
    return "?";
}

std::string to_string(ScalingPreset p) {
    return p == ScalingPreset::Bare ? "bare" : "assumption_preserving";
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw InvalidSpecError("config: bad numeric value for '" + key + "': " + value);
    }
}

}  // namespace

SystemSpec load_system_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpecError("config: cannot open '" + path + "'");

    std::map<std::string, std::string> kv;
    std::string line, section;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidSpecError("config: malformed line '" + line + "'");
        if (section != "system")
            throw InvalidSpecError("config: keys must live in a [system] section");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    SystemSpec spec;
    for (const auto& [key, value] : kv) {
        if (key == "n") spec.n_particles = static_cast<int>(parse_double(key, value));
        else if (key == "hbar") spec.hbar = parse_double(key, value);
        else if (key == "total_mass") spec.total_mass = parse_double(key, value);
        else if (key == "extent") spec.extent = parse_double(key, value);
        else if (key == "trap.kind") {
            if (value == "none") spec.trap.kind = TrapKind::None;
            else if (value == "common") spec.trap.kind = TrapKind::CommonTrap;
            else if (value == "pinning") spec.trap.kind = TrapKind::SitePinning;
            else throw InvalidSpecError("config: unknown trap.kind '" + value + "'");
        } else if (key == "trap.nu") spec.trap.frequency = parse_double(key, value);
        else if (key == "trap.k_pin") spec.trap.pinning_stiffness = parse_double(key, value);
        else if (key == "interaction.kind") {
            if (value == "none") spec.interaction.kind = InteractionKind::None;
            else if (value == "nn") spec.interaction.kind = InteractionKind::NearestNeighbor;
            else if (value == "all") spec.interaction.kind = InteractionKind::AllToAll;
            else throw InvalidSpecError("config: unknown interaction.kind '" + value + "'");
        } else if (key == "interaction.g") spec.interaction.coupling_g = parse_double(key, value);
        else if (key == "interaction.kappa0")
            spec.interaction.base_stiffness = parse_double(key, value);
        else if (key == "scaling_preset") {
            if (value == "bare") spec.scaling_preset = ScalingPreset::Bare;
            else if (value == "assumption_preserving")
                spec.scaling_preset = ScalingPreset::AssumptionPreserving;
            else throw InvalidSpecError("config: unknown scaling_preset '" + value + "'");
        } else throw InvalidSpecError("config: unknown key '" + key + "'");
    }
    return spec;
}

}  // namespace cmchain
