#include "cmchain/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "cmchain/asymptotics.hpp"
#include "cmchain/dynamics.hpp"
#include "cmchain/format.hpp"
#include "cmchain/gaussian.hpp"
#include "cmchain/model.hpp"
#include "cmchain/oracle.hpp"

namespace cmchain {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kSchemaVersion = 1;

struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Output {
    fs::path dir;
    std::vector<std::pair<std::string, std::string>> files;  // name -> content

    void add(const std::string& name, std::string content) {
        files.emplace_back(name, std::move(content));
    }
    // All-or-nothing: contents are staged in memory, written to temp files
    // and renamed only once every scenario step has succeeded.
    void commit() const {
        fs::create_directories(dir);
        for (const auto& [name, content] : files) {
            const fs::path tmp = dir / ("." + name + ".tmp");
            {
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                out << content;
                if (!out) throw std::runtime_error("cannot write " + tmp.string());
            }
            fs::rename(tmp, dir / name);
        }
    }
};

struct Invariants {
    json entries = json::array();
    bool all_pass = true;

    void check(const std::string& name, bool pass, double value, double threshold) {
        entries.push_back(
            {{"name", name}, {"pass", pass}, {"value", value}, {"threshold", threshold}});
        all_pass = all_pass && pass;
    }
};

json fit_to_json(const std::optional<PowerLawFit>& fit) {
    if (!fit) return nullptr;
    return {{"exponent", fit->exponent}, {"prefactor", fit->prefactor}, {"r2", fit->r2}};
}

/// Order-preserving parallel map over [0, count).
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

struct Options {
    std::string config_path;
    std::string out_dir;
    std::vector<int> n_list;
    std::vector<double> nu_grid;
    std::vector<double> g_grid;
    int k_particles = 1;
    double beta = 1.0;
    double dt = 0.0;  // 0: scenario default
    double periods = 10.0;
    double beta_frac = 0.5;
    double gamma_d = 1.0;
    int threads = 0;
    long seed = 0;
    bool have_seed = false;
};

SystemSpec base_spec(const Options& opt, TrapKind preferred_trap) {
    if (!opt.config_path.empty()) return load_system_spec(opt.config_path);
    SystemSpec spec;
    spec.n_particles = 64;
    spec.extent = 1.0;
    spec.interaction.kind = InteractionKind::NearestNeighbor;
    spec.interaction.coupling_g = 1.0;
    spec.interaction.base_stiffness = 1.0;
    if (preferred_trap == TrapKind::CommonTrap) {
        spec.trap.kind = TrapKind::CommonTrap;
        spec.trap.frequency = 1.0;
        spec.scaling_preset = ScalingPreset::Bare;
    } else {
        spec.trap.kind = TrapKind::SitePinning;
        spec.trap.pinning_stiffness = 1.0;
        spec.scaling_preset = ScalingPreset::AssumptionPreserving;
    }
    return spec;
}

json spec_to_json(const SystemSpec& spec) {
    return {{"n", spec.n_particles},
            {"hbar", spec.hbar},
            {"total_mass", spec.total_mass},
            {"extent", spec.extent},
            {"trap", to_string(spec.trap.kind)},
            {"trap_nu", spec.trap.frequency},
            {"trap_k_pin", spec.trap.pinning_stiffness},
            {"interaction", to_string(spec.interaction.kind)},
            {"g", spec.interaction.coupling_g},
            {"kappa0", spec.interaction.base_stiffness},
            {"scaling_preset", to_string(spec.scaling_preset)}};
}

std::string summary_string(const std::string& scenario, const json& payload,
                           const Invariants& inv) {
    json summary = {{"schema_version", kSchemaVersion},
                    {"scenario", scenario},
                    {"invariants", inv.entries},
                    {"all_invariants_pass", inv.all_pass}};
    summary.update(payload);
    return summary.dump(2) + "\n";
}

// ---------------------------------------------------------------- scenarios

int run_localize(const Options& opt, Output& out) {
    SystemSpec spec = base_spec(opt, TrapKind::SitePinning);
    spec.bare_masses.resize(0);
    std::vector<int> n_list =
        opt.n_list.empty() ? std::vector<int>{16, 64, 256, 1024} : opt.n_list;

    SweepResult sweep = localization_sweep(spec, n_list);
    auto series = sweep.series();

    std::ostringstream csv;
    csv << "n,var_x,var_p,gap4,gap6,xi,sp_var\n";
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        csv << n_list[i];
        for (const char* col : {"var_x", "var_p", "gap4", "gap6", "xi", "sp_var"})
            csv << ',' << fmt17(sweep.observables.at(col)[i]);
        csv << '\n';
    }
    out.add("localize.csv", csv.str());

    Invariants inv;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const double ux = sweep.observables.at("var_x")[i] *
                          sweep.observables.at("var_p")[i];
        inv.check("uncertainty_product_n" + std::to_string(n_list[i]),
                  ux >= 0.25 * spec.hbar * spec.hbar - 1e-12, ux,
                  0.25 * spec.hbar * spec.hbar - 1e-12);
    }

    json fits;
    for (const auto& [name, s] : series) fits[name] = fit_to_json(s.fit);
    out.add("localize_summary.json",
            summary_string("localize",
                           {{"system", spec_to_json(spec)},
                            {"n_values", n_list},
                            {"fits", fits}},
                           inv));
    out.commit();
    return inv.all_pass ? 0 : 1;
}

int run_kohn(const Options& opt, Output& out) {
    SystemSpec spec = base_spec(opt, TrapKind::CommonTrap);
    if (spec.trap.kind != TrapKind::CommonTrap)
        throw InvalidSpecError("kohn scenario requires a common trap");
    std::vector<double> g_grid =
        opt.g_grid.empty() ? std::vector<double>{0.0, 0.1, 1.0, 10.0} : opt.g_grid;

    std::vector<double> var_x(g_grid.size());
    for (std::size_t i = 0; i < g_grid.size(); ++i) {
        SystemSpec point = spec;
        point.interaction.coupling_g = g_grid[i];
        var_x[i] = ground_summary(build_model(point)).cm.var_x;
    }

    std::ostringstream csv;
    csv << "g,var_x\n";
    for (std::size_t i = 0; i < g_grid.size(); ++i)
        csv << fmt17(g_grid[i]) << ',' << fmt17(var_x[i]) << '\n';
    out.add("kohn.csv", csv.str());

    const double vmax = *std::max_element(var_x.begin(), var_x.end());
    const double vmin = *std::min_element(var_x.begin(), var_x.end());
    const double spread = (vmax - vmin) / vmin;
    Invariants inv;
    inv.check("kohn_var_x_spread", spread <= 1e-10, spread, 1e-10);

    const double expected = 0.5 * spec.hbar / (spec.total_mass * spec.trap.frequency);
    out.add("kohn_summary.json",
            summary_string("kohn",
                           {{"system", spec_to_json(spec)},
                            {"g_grid", g_grid},
                            {"var_x", var_x},
                            {"var_x_expected_half", expected},
                            {"var_x_paper_normalization", 2.0 * expected},
                            {"relative_spread", spread}},
                           inv));
    out.commit();
    return inv.all_pass ? 0 : 1;
}

int run_dynamics(const Options& opt, Output& out) {
    SystemSpec spec = base_spec(opt, TrapKind::CommonTrap);
    const double period = 2.0 * std::numbers::pi / spec.trap.frequency;
    const double dt = opt.dt > 0.0 ? opt.dt : 1e-3 * period;

    std::vector<double> t_grid;
    const int points_per_period = 20;
    const int total = static_cast<int>(opt.periods * points_per_period);
    for (int i = 0; i <= total; ++i) t_grid.push_back(i * period / points_per_period);

    QuadraticModel model = build_model(spec);
    EhrenfestReport report = ehrenfest_compare(model, {1.0, 0.0}, t_grid, dt);

    std::ostringstream quantum_csv, classical_csv;
    write_trajectory_csv(quantum_csv, report.quantum);
    write_trajectory_csv(classical_csv, report.classical);
    out.add("dynamics.csv", quantum_csv.str());
    out.add("dynamics_classical.csv", classical_csv.str());

    Invariants inv;
    inv.check("quantum_energy_residual", report.quantum_energy_residual <= 1e-10,
              report.quantum_energy_residual, 1e-10);
    inv.check("var_x_constancy", report.var_constancy_defect <= 1e-12,
              report.var_constancy_defect, 1e-12);

    out.add("dynamics_summary.json",
            summary_string("dynamics",
                           {{"system", spec_to_json(spec)},
                            {"dt", dt},
                            {"periods", opt.periods},
                            {"max_mean_deviation", report.max_mean_deviation},
                            {"classical_energy_drift", report.classical_energy_drift}},
                           inv));
    out.commit();
    return inv.all_pass ? 0 : 1;
}

int run_commutator(const Options& opt, Output& out) {
    std::vector<int> n_list =
        opt.n_list.empty() ? std::vector<int>{100, 1000, 10000} : opt.n_list;
    const int k = opt.k_particles;

    std::ostringstream csv;
    csv << "n,closed_magnitude,direct_magnitude,difference\n";
    Invariants inv;
    for (int n : n_list) {
        CommutatorResult r = commutator_suppression(k, n, {}, 1.0, 1.0);
        csv << n << ',' << fmt17(std::abs(r.closed_form)) << ','
            << fmt17(std::abs(r.direct_expansion)) << ',' << fmt17(r.difference) << '\n';
        inv.check("closed_vs_direct_n" + std::to_string(n), r.difference <= 1e-14,
                  r.difference, 1e-14);
    }
    out.add("commutator.csv", csv.str());
    out.add("commutator_summary.json",
            summary_string("commutator", {{"k", k}, {"n_values", n_list}}, inv));
    out.commit();
    return inv.all_pass ? 0 : 1;
}

int run_converge(const Options& opt, Output& out) {
    // Summable-fluctuation tail s_j^2 = 2^{-j}, zero means.
    TailSpec tail;
    tail.means = [](int) { return 0.0; };
    tail.variances = [](int j) { return std::pow(2.0, -j); };
    tail.truncation = 60;

    std::ostringstream csv;
    csv << "skip,d2\n";
    Invariants inv;
    double prev = std::numeric_limits<double>::infinity();
    for (int skip = 0; skip <= 40; ++skip) {
        const double d2 = strong_convergence_distance(tail, opt.beta, skip);
        csv << skip << ',' << fmt17(d2) << '\n';
        inv.check("d2_in_range_skip" + std::to_string(skip), d2 >= -1e-15 && d2 <= 4.0,
                  d2, 4.0);
        inv.check("d2_monotone_skip" + std::to_string(skip), d2 <= prev + 1e-15, d2, prev);
        prev = d2;
    }
    out.add("converge.csv", csv.str());

    const double supremum = norm_distance_supremum(0.0, 100, opt.beta);
    out.add("converge_summary.json",
            summary_string("converge",
                           {{"beta", opt.beta},
                            {"norm_distance_supremum_s2_zero", supremum}},
                           inv));
    out.commit();
    return inv.all_pass ? 0 : 1;
}

int run_finite_volume(const Options& opt, Output& out) {
    std::vector<int> n_list =
        opt.n_list.empty() ? std::vector<int>{10, 100, 1000} : opt.n_list;

    std::ostringstream csv;
    csv << "n,paper_bound,exact_tail\n";
    Invariants inv;
    for (int n : n_list) {
        FiniteVolumeBound b = finite_volume_bound(n, opt.beta_frac, opt.gamma_d, 1.0);
        csv << n << ',' << fmt17(b.paper_bound) << ',' << fmt17(b.exact_binomial_tail)
            << '\n';
        inv.check("exact_tail_le_1_n" + std::to_string(n), b.exact_binomial_tail <= 1.0,
                  b.exact_binomial_tail, 1.0);
    }
    out.add("finite_volume.csv", csv.str());
    out.add("finite_volume_summary.json",
            summary_string("finite-volume",
                           {{"beta_frac", opt.beta_frac}, {"gamma_d", opt.gamma_d}},
                           inv));
    out.commit();
    return inv.all_pass ? 0 : 1;
}

int run_experiment_sweep(const Options& opt, Output& out) {
    SystemSpec spec = base_spec(opt, TrapKind::CommonTrap);
    if (spec.trap.kind != TrapKind::CommonTrap)
        throw InvalidSpecError("experiment-sweep requires a common trap");
    std::vector<double> nu_grid =
        opt.nu_grid.empty() ? std::vector<double>{0.5, 1.0, 2.0} : opt.nu_grid;
    std::vector<double> g_grid =
        opt.g_grid.empty() ? std::vector<double>{0.0, 1.0, 10.0} : opt.g_grid;

    const int count = static_cast<int>(nu_grid.size() * g_grid.size());
    std::vector<double> var_x(count), var_p(count);
    const int threads = opt.threads > 0
                            ? opt.threads
                            : static_cast<int>(std::thread::hardware_concurrency());
    parallel_for(count, threads, [&](int idx) {
        const std::size_t i = idx / g_grid.size();
        const std::size_t j = idx % g_grid.size();
        SystemSpec point = spec;
        point.trap.frequency = nu_grid[i];
        point.interaction.coupling_g = g_grid[j];
        CMObservables cm = ground_summary(build_model(point)).cm;
        var_x[idx] = cm.var_x;
        var_p[idx] = cm.var_p;
    });

    std::ostringstream csv;
    csv << "nu,g,var_x\n";
    Invariants inv;
    for (int idx = 0; idx < count; ++idx) {
        const std::size_t i = idx / g_grid.size();
        const std::size_t j = idx % g_grid.size();
        csv << fmt17(nu_grid[i]) << ',' << fmt17(g_grid[j]) << ',' << fmt17(var_x[idx])
            << '\n';
        const double bound = 0.25 * spec.hbar * spec.hbar - 1e-12;
        inv.check("uncertainty_idx" + std::to_string(idx),
                  var_x[idx] * var_p[idx] >= bound, var_x[idx] * var_p[idx], bound);
    }
    out.add("experiment_sweep.csv", csv.str());
    out.add("experiment_sweep_summary.json",
            summary_string("experiment-sweep",
                           {{"system", spec_to_json(spec)},
                            {"nu_grid", nu_grid},
                            {"g_grid", g_grid}},
                           inv));
    out.commit();
    return inv.all_pass ? 0 : 1;
}

int run_crosscheck(const Options& opt, Output& out) {
    Invariants inv;
    std::ostringstream csv;
    csv << "n,name,engine,oracle,rel_error,pass\n";
    json cases = json::array();
    for (int n : {1, 2}) {
        SystemSpec spec = base_spec(opt, TrapKind::CommonTrap);
        spec.n_particles = n;
        spec.scaling_preset = ScalingPreset::Bare;
        QuadraticModel model = build_model(spec);
        GridSpec grid;
        grid.n_particles = n;
        grid.points_per_axis = 512;
        grid.box_halfwidth = 6.0;
        CrosscheckReport report = crosscheck(model, grid);
        for (const auto& row : report.rows) {
            csv << n << ',' << row.name << ',' << fmt17(row.engine) << ','
                << fmt17(row.oracle) << ',' << fmt17(row.rel_error) << ','
                << (row.pass ? 1 : 0) << '\n';
            inv.check("n" + std::to_string(n) + "_" + row.name, row.pass, row.rel_error,
                      report.tolerance);
        }
        cases.push_back({{"n", n},
                         {"points_per_axis", grid.points_per_axis},
                         {"pass", report.pass}});
    }
    out.add("crosscheck.csv", csv.str());
    out.add("crosscheck_summary.json", summary_string("crosscheck", {{"cases", cases}}, inv));
    out.commit();
    return inv.all_pass ? 0 : 1;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"Harmonic-chain center-of-mass localization toolkit"};
    app.require_subcommand(1);

    Options opt;
    const char* env_out = std::getenv("CMCHAIN_OUT");
    opt.out_dir = env_out ? env_out : ".";

    std::vector<std::string> n_raw, nu_raw, g_raw;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opt.config_path, "system config file");
        cmd->add_option("--out", opt.out_dir, "output directory");
        cmd->add_option("--threads", opt.threads, "worker threads (0: all cores)");
        cmd->add_option("--seed", opt.seed, "random seed (Monte Carlo checks only)");
        cmd->add_option("--n", n_raw, "comma-separated particle counts")->delimiter(',');
        cmd->add_option("--nu", nu_raw, "comma-separated trap frequencies")->delimiter(',');
        cmd->add_option("--g", g_raw, "comma-separated couplings")->delimiter(',');
        cmd->add_option("--dt", opt.dt, "classical integrator step");
        return cmd;
    };

    auto* localize = add_common(app.add_subcommand("localize", "N-sweep localization scaling"));
    auto* kohn = add_common(app.add_subcommand("kohn", "coupling-independence of the trapped CM"));
    auto* dynamics = add_common(app.add_subcommand("dynamics", "quantum vs classical CM trajectory"));
    dynamics->add_option("--periods", opt.periods, "trajectory length in trap periods");
    auto* commutator = add_common(app.add_subcommand("commutator", "partial-CM commutator suppression"));
    commutator->add_option("--k", opt.k_particles, "subsystem particle count");
    auto* converge = add_common(app.add_subcommand("converge", "strong-convergence tail distance"));
    converge->add_option("--beta", opt.beta, "Weyl generator parameter");
    auto* finite_volume = add_common(app.add_subcommand("finite-volume", "escape-probability bound"));
    finite_volume->add_option("--beta-frac", opt.beta_frac, "fraction of far particles");
    finite_volume->add_option("--gamma-d", opt.gamma_d, "decay rate times distance");
    auto* experiment = add_common(app.add_subcommand("experiment-sweep", "Var(nu, g) heatmap"));
    auto* xcheck = add_common(app.add_subcommand("crosscheck", "engine vs grid oracle"));

    std::vector<const char*> argv;
    argv.push_back("cmchain");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        for (const auto& s : n_raw) opt.n_list.push_back(std::stoi(s));
        for (const auto& s : nu_raw) opt.nu_grid.push_back(std::stod(s));
        for (const auto& s : g_raw) opt.g_grid.push_back(std::stod(s));
    } catch (const std::exception&) {
        std::cerr << "error: malformed numeric list\n";
        return 2;
    }

    Output out;
    out.dir = opt.out_dir;
    try {
        if (localize->parsed()) return run_localize(opt, out);
        if (kohn->parsed()) return run_kohn(opt, out);
        if (dynamics->parsed()) return run_dynamics(opt, out);
        if (commutator->parsed()) return run_commutator(opt, out);
        if (converge->parsed()) return run_converge(opt, out);
        if (finite_volume->parsed()) return run_finite_volume(opt, out);
        if (experiment->parsed()) return run_experiment_sweep(opt, out);
        if (xcheck->parsed()) return run_crosscheck(opt, out);
        std::cerr << "error: unknown scenario\n";
        return 2;
    } catch (const InvalidSpecError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const UnsupportedScenarioError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const SingularModelError& e) {
        std::cerr << "error: " << e.what() << " (null space: " << e.null_space() << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace cmchain
