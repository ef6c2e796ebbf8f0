#ifndef CMCHAIN_ASYMPTOTICS_HPP
#define CMCHAIN_ASYMPTOTICS_HPP

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmchain/gaussian.hpp"
#include "cmchain/model.hpp"

namespace cmchain {

struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double r2 = 0.0;
};

/// Least squares on (ln n, ln y); requires >= 3 points, all y > 0.
PowerLawFit fit_power_law(const std::vector<double>& n, const std::vector<double>& y);

struct ScalingSeries {
    std::vector<double> n_values;
    std::vector<double> observable;
    std::optional<PowerLawFit> fit;  // present when >= 3 positive points
};

ScalingSeries make_scaling_series(std::vector<double> n, std::vector<double> y);

/// One localization sweep over particle counts. Observables keyed by name:
/// var_x, var_p, gap4, gap6, gap8, xi, sp_var, mass_fraction.
struct SweepResult {
    std::vector<int> n_values;
    std::map<std::string, std::vector<double>> observables;  // nan where undefined
    std::map<std::string, ScalingSeries> series() const;     // skips nan entries
};

struct SweepOptions {
    // Interval for the mass-fraction column, as multiples of the extent.
    double interval_halfwidth_factor = 0.6;
};
SweepResult localization_sweep(const SystemSpec& spec_template,
                               const std::vector<int>& n_list,
                               const SweepOptions& opts = {});

/// Expectation-level [X_cm^(k), P_cm^(n)] with full-system mass weights:
/// closed form i*hbar*sum_{i<k} w_i against the direct index expansion.
struct CommutatorResult {
    std::complex<double> closed_form;
    std::complex<double> direct_expansion;
    double difference = 0.0;
};
CommutatorResult commutator_suppression(int k_particles, int n_particles,
                                        const Eigen::VectorXd& bare_masses,
                                        double total_mass, double hbar);

/// Product Gaussian tail of single-particle momentum factors.
struct TailSpec {
    std::function<double(int)> means;      // j -> mean (j starts at 1)
    std::function<double(int)> variances;  // j -> variance >= 0
    int truncation = 0;                    // explicit tail length evaluated
};

/// d^2 = 2 - 2 Re prod_{j>skip} exp(i beta mean_j - beta^2 var_j / 2),
/// accumulated in log space.
double strong_convergence_distance(const TailSpec& tail, double beta, int skip);

/// sup over product Gaussian tail states of the unitary-difference norm:
/// sqrt(2 + 2 exp(-beta^2 s^2 L / 2)) with the phase-aligned means.
double norm_distance_supremum(double s2, int tail_length, double beta);

struct FiniteVolumeBound {
    double paper_bound = 0.0;       // beta^{-beta n} exp(-gamma n d)
    double log_paper_bound = 0.0;
    double exact_binomial_tail = 0.0;
};
FiniteVolumeBound finite_volume_bound(int n_particles, double beta_frac, double gamma,
                                      double distance);

}  // namespace cmchain

#endif  // CMCHAIN_ASYMPTOTICS_HPP
