// Regenerates tests/golden/golden.json. The values come from the grid
// oracle and from plain dense eigendecompositions written out here, so the
// frozen numbers do not depend on the covariance engine they later test.
//
//   ./golden_gen > ../tests/golden/golden.json

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <iostream>
#include <json.hpp>
#include <vector>

#include "cmchain/asymptotics.hpp"
#include "cmchain/gaussian.hpp"
#include "cmchain/model.hpp"
#include "cmchain/oracle.hpp"

using namespace cmchain;
using nlohmann::json;

namespace {

SystemSpec pinned_spec(int n, ScalingPreset preset) {
    SystemSpec spec;
    spec.n_particles = n;
    spec.trap.kind = TrapKind::SitePinning;
    spec.trap.pinning_stiffness = 1.0;
    spec.interaction.kind = InteractionKind::NearestNeighbor;
    spec.interaction.coupling_g = 1.0;
    spec.interaction.base_stiffness = 1.0;
    spec.scaling_preset = preset;
    return spec;
}

// var_x of the CM from a from-scratch dense diagonalization (no shared code
// with ground_state / ground_summary).
double dense_cm_variance(const QuadraticModel& model) {
    const int n = model.size();
    const Eigen::VectorXd inv_sqrt_m = model.masses.array().rsqrt().matrix();
    Eigen::MatrixXd dyn = model.dense_stiffness();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dyn(i, j) *= inv_sqrt_m[i] * inv_sqrt_m[j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dyn);
    // var_x = w' Sxx w with Sxx = (hbar/2) M^{-1/2} U W^{-1} U' M^{-1/2}
    const Eigen::VectorXd u =
        (model.weights.array() * model.masses.array().rsqrt()).matrix();
    double var = 0.0;
    for (int k = 0; k < n; ++k) {
        const double proj = es.eigenvectors().col(k).dot(u);
        var += 0.5 * model.hbar * proj * proj / std::sqrt(es.eigenvalues()[k]);
    }
    return var;
}

// <exp(i(alpha X_cm + beta P_cm))> by quadrature on the oracle eigenfunction:
// e^{i beta P_cm} translates every coordinate by beta*hbar, which must align
// with an integer number of grid cells. n = 2 only.
std::complex<double> grid_characteristic(const QuadraticModel& model, int pts,
                                         double halfwidth, double alpha, double beta) {
    GridSpec spec{pts, halfwidth, 2};
    GridGroundState g = grid_ground_state(model, spec);
    const double h = g.grid_spacing;
    const int shift = static_cast<int>(std::lround(beta * model.hbar / h));
    if (std::abs(shift * h - beta * model.hbar) > 1e-12)
        throw std::runtime_error("beta*hbar must align with the grid");

    // <psi| e^{i alpha beta hbar/2} e^{i alpha X_cm} T_{beta hbar} |psi>
    std::complex<double> acc(0.0, 0.0);
    const Eigen::VectorXd& psi = g.wavefunction;
    for (long f = 0; f < psi.size(); ++f) {
        const int i0 = static_cast<int>(f % pts);
        const int i1 = static_cast<int>(f / pts);
        if (i0 + shift >= pts || i1 + shift >= pts) continue;
        const double x0 = model.centers[0] - halfwidth + h * i0;
        const double x1 = model.centers[1] - halfwidth + h * i1;
        const double xcm = model.weights[0] * x0 + model.weights[1] * x1;
        const long to = f + shift + static_cast<long>(shift) * pts;
        acc += psi[f] * psi[to] * std::exp(std::complex<double>(0.0, alpha * xcm));
    }
    acc *= std::exp(std::complex<double>(0.0, 0.5 * alpha * beta * model.hbar));
    return acc;
}

}  // namespace

int main() {
    json out;
    out["version"] = 1;

    {  // n=2 pinned chain, stiffness [[2,-1],[-1,2]], masses [0.5,0.5]
        SystemSpec spec = pinned_spec(2, ScalingPreset::Bare);
        QuadraticModel model = build_model(spec);
        GridSpec grid;
        grid.n_particles = 2;
        grid.points_per_axis = 512;
        grid.box_halfwidth = 6.0;
        GridGroundState g = grid_ground_state(model, grid);
        out["grid_n2"] = {{"energy", g.energy},
                          {"cm_variance", g.cm_variance},
                          {"cm_momentum_variance", g.cm_momentum_variance},
                          {"var_x0", g.variances[0]},
                          {"cov01", g.covariance(0, 1)}};
        out["dense_n2_cm_variance"] = dense_cm_variance(model);

        const std::complex<double> chi = grid_characteristic(model, 481, 6.0, 1.0, 1.0);
        out["charfn_n2_alpha1_beta1"] = {{"re", chi.real()}, {"im", chi.imag()}};
    }

    {  // independent dense value for the n=64 pinned chain
        QuadraticModel model = build_model(pinned_spec(64, ScalingPreset::Bare));
        out["pinned64_var_x"] = dense_cm_variance(model);
    }

    {  // engine sweep golden: coupled chain localization fits
        SystemSpec spec = pinned_spec(16, ScalingPreset::AssumptionPreserving);
        SweepResult sweep = localization_sweep(spec, {16, 64, 256, 1024});
        auto series = sweep.series();
        const PowerLawFit fx = *series.at("var_x").fit;
        const PowerLawFit f4 = *series.at("gap4").fit;
        out["localize_fit_var_x"] = {
            {"exponent", fx.exponent}, {"prefactor", fx.prefactor}, {"r2", fx.r2}};
        out["localize_fit_gap4"] = {
            {"exponent", f4.exponent}, {"prefactor", f4.prefactor}, {"r2", f4.r2}};

        // small-n engine values cross-checked against the grid oracle below
        std::vector<double> small;
        for (int n : {2, 3}) {
            SystemSpec s2 = pinned_spec(n, ScalingPreset::AssumptionPreserving);
            small.push_back(ground_summary(build_model(s2)).cm.var_x);
        }
        out["ap_pinned_var_x_n2"] = small[0];
        out["ap_pinned_var_x_n3"] = small[1];
        {
            QuadraticModel m2 = build_model(pinned_spec(2, ScalingPreset::AssumptionPreserving));
            GridSpec grid{512, 5.0, 2};
            out["grid_ap_pinned_var_x_n2"] = grid_ground_state(m2, grid).cm_variance;
        }
        {
            QuadraticModel m3 = build_model(pinned_spec(3, ScalingPreset::AssumptionPreserving));
            GridSpec grid{128, 5.0, 3};
            out["grid_ap_pinned_var_x_n3"] = grid_ground_state(m3, grid).cm_variance;
        }
    }

    {  // mass fraction inside +-0.6 extent for the wide pinned chain
        SystemSpec spec = pinned_spec(256, ScalingPreset::AssumptionPreserving);
        spec.extent = 50.0;
        QuadraticModel model = build_model(spec);
        GroundSummary gs = ground_summary(model);
        const double frac = gaussian_interval_mass(model.centers, gs.site_variances,
                                                   model.weights, -0.6 * spec.extent,
                                                   0.6 * spec.extent);
        out["mass_fraction_n256_extent50"] = frac;
    }

    {  // numeric re-maximization of the unitary-difference norm over the mean
        const double s2 = 0.5, beta = 1.0;
        const int tail = 100;
        double best = 0.0;
        for (int k = 0; k <= 20000; ++k) {
            const double pbar = -0.5 + 1e-4 * k;  // phase sweeps many periods
            const double mag = std::exp(-0.5 * beta * beta * s2 * tail);
            const double d2 = 2.0 - 2.0 * mag * std::cos(beta * pbar * tail);
            best = std::max(best, std::sqrt(d2));
        }
        out["norm_sup_s2_half_tail100"] = best;
    }

    std::cout << out.dump(2) << "\n";
    return 0;
}
