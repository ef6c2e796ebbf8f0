#include "cmchain/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cmchain {

PowerLawFit fit_power_law(const std::vector<double>& n, const std::vector<double>& y) {
    if (n.size() != y.size())
        throw InvalidSpecError("fit_power_law: length mismatch");
    if (n.size() < 3)
        throw InsufficientDataError("fit_power_law: need at least 3 points");
    for (std::size_t i = 0; i < y.size(); ++i)
        if (!(y[i] > 0.0) || !(n[i] > 0.0) || !std::isfinite(y[i]))
            throw InsufficientDataError("fit_power_law: all points must be positive");

    const std::size_t m = n.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double lx = std::log(n[i]), ly = std::log(y[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    PowerLawFit fit;
    const double denom = m * sxx - sx * sx;
    fit.exponent = (m * sxy - sx * sy) / denom;
    const double intercept = (sy - fit.exponent * sx) / m;
    fit.prefactor = std::exp(intercept);

    double ss_res = 0, ss_tot = 0;
    const double mean_ly = sy / m;
    for (std::size_t i = 0; i < m; ++i) {
        const double ly = std::log(y[i]);
        const double pred = intercept + fit.exponent * std::log(n[i]);
        ss_res += (ly - pred) * (ly - pred);
        ss_tot += (ly - mean_ly) * (ly - mean_ly);
    }
    fit.r2 = ss_tot > 1e-30 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
    return fit;
}

ScalingSeries make_scaling_series(std::vector<double> n, std::vector<double> y) {
    ScalingSeries series;
    series.n_values = std::move(n);
    series.observable = std::move(y);
    std::vector<double> fn, fy;
    for (std::size_t i = 0; i < series.n_values.size(); ++i)
        if (std::isfinite(series.observable[i]) && series.observable[i] > 0.0) {
            fn.push_back(series.n_values[i]);
            fy.push_back(series.observable[i]);
        }
    if (fn.size() >= 3) series.fit = fit_power_law(fn, fy);
    return series;
}

std::map<std::string, ScalingSeries> SweepResult::series() const {
    std::map<std::string, ScalingSeries> out;
    std::vector<double> nd(n_values.begin(), n_values.end());
    for (const auto& [name, values] : observables)
        out[name] = make_scaling_series(nd, values);
    return out;
}

SweepResult localization_sweep(const SystemSpec& spec_template,
                               const std::vector<int>& n_list,
                               const SweepOptions& opts) {
    if (n_list.empty()) throw InvalidSpecError("localization_sweep: empty n list");
    for (std::size_t i = 0; i + 1 < n_list.size(); ++i)
        if (!(n_list[i] < n_list[i + 1]))
            throw InvalidSpecError("localization_sweep: n values must strictly increase");
    if (spec_template.bare_masses.size() != 0)
        throw InvalidSpecError(
            "localization_sweep: template must use equal bare masses (leave empty)");

    SweepResult result;
    result.n_values = n_list;
    auto& obs = result.observables;
    const char* names[] = {"var_x", "var_p", "gap4",    "gap6",
                           "gap8",  "xi",    "sp_var", "mass_fraction"};
    for (const char* name : names) obs[name] = {};

    const double half = opts.interval_halfwidth_factor * spec_template.extent;
    for (int n : n_list) {
        SystemSpec spec = spec_template;
        spec.n_particles = n;
        QuadraticModel model;
        try {
            model = build_model(spec);
        } catch (const SingularModelError& e) {
            throw SingularModelError("localization_sweep: singular model at n=" +
                                         std::to_string(n) + ": " + e.what(),
                                     e.null_space());
        }
        GroundSummary summary = ground_summary(model);
        obs["var_x"].push_back(summary.cm.var_x);
        obs["var_p"].push_back(summary.cm.var_p);
        obs["gap4"].push_back(summary.cm.moment_gaps.at(4));
        obs["gap6"].push_back(summary.cm.moment_gaps.at(6));
        obs["gap8"].push_back(summary.cm.moment_gaps.at(8));
        obs["xi"].push_back(summary.cm.correlation_length.value_or(
            std::numeric_limits<double>::quiet_NaN()));
        obs["sp_var"].push_back(summary.cm.single_particle_var_max);
        obs["mass_fraction"].push_back(gaussian_interval_mass(
            model.centers, summary.site_variances, model.weights, -half, half));
    }
    return result;
}

CommutatorResult commutator_suppression(int k_particles, int n_particles,
                                        const Eigen::VectorXd& bare_masses,
                                        double total_mass, double hbar) {
    if (n_particles < 1)
        throw InvalidSpecError("commutator_suppression: n_particles must be >= 1");
    if (k_particles < 1 || k_particles > n_particles)
        throw InvalidSpecError("commutator_suppression: need 1 <= k <= n");
    Eigen::VectorXd bare = bare_masses.size() == n_particles
                               ? bare_masses
                               : Eigen::VectorXd::Ones(n_particles);
    if (bare_masses.size() != 0 && bare_masses.size() != n_particles)
        throw InvalidSpecError("commutator_suppression: bare mass length mismatch");
    const Eigen::VectorXd weights =
        renormalize_masses(bare, total_mass) / total_mass;

    CommutatorResult result;
    result.closed_form = std::complex<double>(
        0.0, hbar * weights.head(k_particles).sum());
    // Direct expansion over single-particle canonical pairs [x_i, p_j] = i hbar d_ij.
    std::complex<double> direct(0.0, 0.0);
    for (int i = 0; i < k_particles; ++i)
        for (int j = 0; j < n_particles; ++j)
            if (i == j) direct += std::complex<double>(0.0, hbar * weights[i]);
    result.direct_expansion = direct;
    result.difference = std::abs(result.closed_form - result.direct_expansion);
    return result;
}

double strong_convergence_distance(const TailSpec& tail, double beta, int skip) {
    if (skip < 0) throw InvalidSpecError("strong_convergence_distance: skip must be >= 0");
    double log_mag = 0.0, phase = 0.0;
    for (int j = skip + 1; j <= tail.truncation; ++j) {
        const double s2 = tail.variances(j);
        if (s2 < 0.0)
            throw InvalidSpecError("strong_convergence_distance: negative variance");
        log_mag -= 0.5 * beta * beta * s2;
        phase += beta * tail.means(j);
    }
    return 2.0 - 2.0 * std::exp(log_mag) * std::cos(phase);
}

double norm_distance_supremum(double s2, int tail_length, double beta) {
    if (tail_length < 1)
        throw InvalidSpecError("norm_distance_supremum: tail_length must be >= 1");
    if (s2 < 0.0) throw InvalidSpecError("norm_distance_supremum: negative variance");
    // Phase-aligned means p_j = pi/(beta L) push the product to the negative
    // real axis; magnitude decay caps the achievable distance.
    return std::sqrt(2.0 + 2.0 * std::exp(-0.5 * beta * beta * s2 * tail_length));
}

FiniteVolumeBound finite_volume_bound(int n_particles, double beta_frac, double gamma,
                                      double distance) {
    if (n_particles < 1)
        throw InvalidSpecError("finite_volume_bound: n_particles must be >= 1");
    if (!(beta_frac > 0.0 && beta_frac < 1.0))
        throw InvalidSpecError("finite_volume_bound: beta_frac must lie in (0, 1)");
    if (gamma < 0.0 || distance < 0.0)
        throw InvalidSpecError("finite_volume_bound: gamma and distance must be >= 0");

    FiniteVolumeBound out;
    const double n = n_particles;
    out.log_paper_bound = -beta_frac * n * std::log(beta_frac) - gamma * n * distance;
    out.paper_bound = std::exp(out.log_paper_bound);

    const double log_q = -gamma * distance;
    if (log_q >= 0.0) {
        out.exact_binomial_tail = 1.0;  // q = 1: every particle is "far" surely
        return out;
    }
    const double q = std::exp(log_q);
    const double log_1mq = std::log1p(-q);
    const int k0 = static_cast<int>(std::ceil(beta_frac * n));
    std::vector<double> log_terms;
    log_terms.reserve(n_particles - k0 + 1);
    const double lg_n1 = std::lgamma(n + 1.0);
    for (int k = k0; k <= n_particles; ++k) {
        log_terms.push_back(lg_n1 - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                            k * log_q + (n - k) * log_1mq);
    }
    const double m = *std::max_element(log_terms.begin(), log_terms.end());
    double acc = 0.0;
    for (double lt : log_terms) acc += std::exp(lt - m);
    out.exact_binomial_tail = std::min(1.0, std::exp(m) * acc);
    return out;
}

}  // namespace cmchain
