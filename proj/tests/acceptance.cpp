// Shipping gate: one pass/fail line per criterion, non-zero exit on any
// failure. Criteria mirror the documented release checklist for the
// center-of-mass localization toolkit.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cmchain/asymptotics.hpp"
#include "cmchain/cli.hpp"
#include "cmchain/dynamics.hpp"
#include "cmchain/gaussian.hpp"
#include "cmchain/model.hpp"
#include "cmchain/oracle.hpp"

using namespace cmchain;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
    std::printf("criterion %2d (%s): %s%s%s\n", index, name.c_str(),
                pass ? "PASS" : "FAIL", detail.empty() ? "" : " -- ", detail.c_str());
    if (!pass) ++g_failures;
}

SystemSpec sweep_template(double g) {
    SystemSpec spec;
    spec.n_particles = 16;
    spec.trap.kind = TrapKind::SitePinning;
    spec.trap.pinning_stiffness = 1.0;
    spec.interaction.kind =
        g == 0.0 ? InteractionKind::None : InteractionKind::NearestNeighbor;
    spec.interaction.coupling_g = g;
    spec.interaction.base_stiffness = 1.0;
    spec.scaling_preset = ScalingPreset::AssumptionPreserving;
    spec.extent = 50.0;
    return spec;
}

const std::vector<int> kSweepN{16, 64, 256, 1024, 4096, 16384};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

int main() {
    // ---- 1: localization scaling of the CM position variance ------------
    const auto t0 = std::chrono::steady_clock::now();
    SweepResult sweep = localization_sweep(sweep_template(1.0), kSweepN);
    const double sweep_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
        const PowerLawFit fit = *sweep.series().at("var_x").fit;
        const bool pass = std::abs(fit.exponent + 1.0) <= 0.05 && fit.r2 >= 0.999 &&
                          sweep_seconds <= 60.0;
        report(1, "cm variance localization scaling", pass,
               "exponent=" + fmt(fit.exponent) + " r2=" + fmt(fit.r2) + " time=" +
                   fmt(sweep_seconds) + "s");
    }

    // ---- 2: independent-particle exactness var_x = sigma^2 / n ----------
    {
        SweepResult free_sweep = localization_sweep(sweep_template(0.0), kSweepN);
        double worst = 0.0;
        for (std::size_t i = 0; i < kSweepN.size(); ++i) {
            const double expected =
                free_sweep.observables.at("sp_var")[i] / kSweepN[i];
            const double got = free_sweep.observables.at("var_x")[i];
            worst = std::max(worst, std::abs(got - expected) / expected);
        }
        report(2, "independent-particle variance average", worst <= 1e-12,
               "max rel dev=" + fmt(worst));
    }

    // ---- 3: single-particle trap variance, both normalizations ----------
    {
        SystemSpec spec;
        spec.n_particles = 64;
        spec.trap.kind = TrapKind::CommonTrap;
        spec.trap.frequency = 1.0;
        spec.interaction.kind = InteractionKind::None;
        spec.interaction.coupling_g = 0.0;
        QuadraticModel model = build_model(spec);
        CMObservables cm = cm_observables(ground_state(model), model);
        const double half = model.hbar / (2.0 * model.total_mass * spec.trap.frequency);
        const bool pass = std::abs(cm.var_x - half) <= 1e-12 * half;
        report(3, "trap ground variance hbar/(2 M nu)", pass,
               "var_x=" + fmt(cm.var_x) + " hbar/(2Mnu)=" + fmt(half) +
                   " doubled normalization hbar/(Mnu)=" + fmt(2.0 * half));
    }

    // ---- 4: variance is coupling-independent in a common trap -----------
    {
        double lo = 1e300, hi = 0.0;
        for (double g : {0.0, 0.1, 1.0, 10.0}) {
            SystemSpec spec;
            spec.n_particles = 64;
            spec.trap.kind = TrapKind::CommonTrap;
            spec.trap.frequency = 1.0;
            spec.interaction.kind = InteractionKind::NearestNeighbor;
            spec.interaction.coupling_g = g;
            QuadraticModel model = build_model(spec);
            const double v = cm_observables(ground_state(model), model).var_x;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double spread = (hi - lo) / lo;
        report(4, "coupling-independent trap variance", spread <= 1e-10,
               "relative spread=" + fmt(spread));
    }

    // ---- 5: central moment gaps follow Wick and scale away ---------------
    {
        QuadraticModel model = build_model([] {
            SystemSpec s = sweep_template(1.0);
            s.n_particles = 64;
            return s;
        }());
        GaussianState gs = ground_state(model);
        CMObservables cm = cm_observables(gs, model);
        const double s2 = cm.var_x;
        double worst = 0.0;
        const double closed[5] = {0.0, s2, 3 * s2 * s2, 15 * std::pow(s2, 3),
                                  105 * std::pow(s2, 4)};
        const int orders[4] = {2, 4, 6, 8};
        for (int i = 0; i < 4; ++i) {
            const double gap = central_moment_gap(gs, model, orders[i]);
            worst = std::max(worst, std::abs(gap - closed[i + 1]) / closed[i + 1]);
        }
        const PowerLawFit gap4 = *sweep.series().at("gap4").fit;
        const bool pass = worst <= 1e-10 && std::abs(gap4.exponent + 2.0) <= 0.1;
        report(5, "wick moment gaps and their scaling", pass,
               "max rel dev=" + fmt(worst) + " gap4 exponent=" + fmt(gap4.exponent));
    }

    // ---- 6: commutator suppression --------------------------------------
    {
        Eigen::VectorXd empty;
        bool pass = true;
        std::string detail;
        for (int n : {100, 1000, 10000}) {
            CommutatorResult r = commutator_suppression(5, n, empty, 1.0, 1.0);
            pass = pass && r.difference <= 1e-14;
            const double expected = 5.0 / n;
            pass = pass &&
                   std::abs(std::abs(r.closed_form) - expected) <= 1e-14 * expected;
        }
        CommutatorResult full = commutator_suppression(64, 64, empty, 1.0, 1.0);
        pass = pass && std::abs(full.closed_form - std::complex<double>(0.0, 1.0)) <= 1e-15;
        report(6, "cm commutator suppression 1/n", pass,
               "k=n magnitude=" + fmt(std::abs(full.closed_form)));
    }

    // ---- 7: strong vs norm convergence dichotomy -------------------------
    {
        TailSpec uniform;
        uniform.means = [](int) { return 0.0; };
        uniform.variances = [](int) { return 0.5; };
        uniform.truncation = 10;
        const double d2 = strong_convergence_distance(uniform, 1.0, 0);
        const double closed = 2.0 - 2.0 * std::exp(-2.5);
        bool pass = std::abs(d2 - closed) <= 1e-12;

        TailSpec summable;
        summable.means = [](int) { return 0.0; };
        summable.variances = [](int j) { return std::pow(2.0, -j); };
        summable.truncation = 60;
        const double d2_skip = strong_convergence_distance(summable, 1.0, 30);
        pass = pass && d2_skip < 1e-6;

        const double sup = norm_distance_supremum(0.0, 100, 1.0);
        pass = pass && sup >= 2.0 - 1e-3;
        report(7, "strong vs norm convergence dichotomy", pass,
               "fixed-state dev=" + fmt(std::abs(d2 - closed)) + " skip30 d2=" +
                   fmt(d2_skip) + " sup=" + fmt(sup));
    }

    // ---- 8: Ehrenfest / energy-shell dynamics ----------------------------
    {
        SystemSpec spec;
        spec.n_particles = 16;
        spec.trap.kind = TrapKind::CommonTrap;
        spec.trap.frequency = 1.0;
        spec.interaction.kind = InteractionKind::NearestNeighbor;
        spec.interaction.coupling_g = 1.0;
        QuadraticModel model = build_model(spec);
        std::vector<double> grid;
        for (int i = 0; i <= 1000; ++i) grid.push_back(0.2 * kPi * i);  // 100 periods
        EhrenfestReport r =
            ehrenfest_compare(model, {1.0, 0.5}, grid, 1e-3 * 2.0 * kPi);
        const bool pass = r.max_mean_deviation <= 1e-6 &&
                          r.quantum_energy_residual <= 1e-10 &&
                          r.classical_energy_drift <= 1e-9 &&
                          r.var_constancy_defect <= 1e-12;
        report(8, "ehrenfest means and energy shell", pass,
               "mean dev=" + fmt(r.max_mean_deviation) + " energy res=" +
                   fmt(r.quantum_energy_residual) + " drift=" +
                   fmt(r.classical_energy_drift) + " var defect=" +
                   fmt(r.var_constancy_defect));
    }

    // ---- 9: engine vs grid oracle ----------------------------------------
    {
        bool pass = true;
        double worst = 0.0;
        for (int n : {1, 2}) {
            SystemSpec spec;
            spec.n_particles = n;
            spec.trap.kind = TrapKind::CommonTrap;
            spec.trap.frequency = 1.0;
            spec.interaction.kind = InteractionKind::NearestNeighbor;
            spec.interaction.coupling_g = 1.0;
            CrosscheckReport r = crosscheck(build_model(spec), GridSpec{512, 6.0, n});
            pass = pass && r.pass;
            for (const auto& row : r.rows) worst = std::max(worst, row.rel_error);
        }
        // observed convergence order under grid refinement, fixed box
        QuadraticModel osc = [] {
            SystemSpec s;
            s.n_particles = 1;
            s.trap.kind = TrapKind::CommonTrap;
            s.trap.frequency = 1.0;
            s.interaction.kind = InteractionKind::None;
            return build_model(s);
        }();
        const double e_coarse =
            std::abs(grid_ground_state(osc, GridSpec{129, 8.0, 1}).variances[0] - 0.5);
        const double e_fine =
            std::abs(grid_ground_state(osc, GridSpec{257, 8.0, 1}).variances[0] - 0.5);
        const double order = std::log2(e_coarse / e_fine);
        pass = pass && std::abs(order - 2.0) <= 0.2;
        report(9, "grid oracle agreement and order", pass,
               "max rel err=" + fmt(worst) + " order=" + fmt(order));
    }

    // ---- 10: finite-volume containment and bound evaluator ---------------
    {
        bool pass = true;
        double lowest = 1.0;
        for (double f : sweep.observables.at("mass_fraction"))
            lowest = std::min(lowest, f);
        pass = pass && lowest >= 0.999;

        FiniteVolumeBound b = finite_volume_bound(100, 0.5, 1.0, 1.0);
        const double expected_log = 50.0 * std::log(2.0) - 100.0;
        pass = pass &&
               std::abs(b.log_paper_bound - expected_log) <= 1e-12 * std::abs(expected_log);
        for (int n : {10, 100, 1000})
            for (double beta : {0.1, 0.5, 0.9})
                pass = pass && finite_volume_bound(n, beta, 1.0, 1.0).exact_binomial_tail <= 1.0;
        report(10, "finite-volume mass containment and bound", pass,
               "min fraction=" + fmt(lowest) + " log-bound dev=" +
                   fmt(std::abs(b.log_paper_bound - expected_log)));
    }

    // ---- 11: byte-identical output across worker counts ------------------
    {
        const fs::path base = fs::temp_directory_path() / "cmchain_acceptance";
        fs::remove_all(base);
        const fs::path a = base / "a", b = base / "b";
        std::vector<std::string> common{"experiment-sweep", "--nu", "0.5,1,2,4",
                                        "--g",              "0,0.5,1,2,8"};
        auto run_with = [&](const fs::path& dir, const std::string& threads) {
            std::vector<std::string> args = common;
            args.insert(args.end(), {"--threads", threads, "--out", dir.string()});
            return cli_main(args);
        };
        bool pass = run_with(a, "1") == 0 && run_with(b, "8") == 0;
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            std::ostringstream buf;
            buf << in.rdbuf();
            return buf.str();
        };
        for (const char* name : {"experiment_sweep.csv", "experiment_sweep_summary.json"})
            pass = pass && !slurp(a / name).empty() && slurp(a / name) == slurp(b / name);
        fs::remove_all(base);
        report(11, "deterministic multi-threaded output", pass, "");
    }

    if (g_failures > 0) std::printf("%d criterion(s) FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
